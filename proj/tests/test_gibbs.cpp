#include "doctest.h"

#include <cmath>
#include <sstream>

#include "mvbif/errors.hpp"
#include "mvbif/gibbs.hpp"
#include "mvbif/selfconsistency.hpp"
#include "oracles.hpp"
#include "test_models.hpp"

using namespace mvbif;

namespace {

MeanField k_field(double r) { return {Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, r)}; }

TestFunction poly(int p) {
  return {[p](double x) { return std::pow(x, p); },
          [p](double x) { return p * std::pow(x, p - 1); },
          [p](double x) { return p * (p - 1) * std::pow(x, p - 2); }};
}

}  // namespace

TEST_CASE("standard Gaussian") {
  GridModel gm = discretize(gaussian_model());
  GibbsMeasure mu = build_gibbs(gm, 1.0, MeanField::zeros(0, 0));
  CHECK(std::abs(moment(mu, Eigen::VectorXd::Ones(gm.size())) - 1) < 1e-13);
  CHECK(std::abs(moment(mu, [](double x) { return x * x; }) - 1) < 1e-12);
  CHECK(std::abs(moment(mu, [](double x) { return x * x * x * x; }) - 3) < 1e-11);
  CHECK(std::abs(mu.log_norm - 0.5 * std::log(2 * M_PI)) < 1e-12);
  auto r = stationarity_residual(mu, gm, {poly(2), poly(4)});
  CHECK(std::abs(r[0]) < 1e-10);
  CHECK(std::abs(r[1]) < 1e-10);
}

TEST_CASE("Gibbs exponent matches the formula") {
  ModelSpec m = testmodels::with_v2(0.5);
  GridModel gm = discretize(m);
  MeanField mf{Eigen::VectorXd::Constant(1, 0.7), Eigen::VectorXd::Constant(1, -0.2)};
  const double a = 1.3;
  Eigen::VectorXd E = gibbs_exponent(gm, a, mf);
  const double theta = 0.5 * a + 0.25 * a * a;
  for (Eigen::Index i = 0; i < gm.size(); i += 37) {
    const double x = gm.nodes()[i];
    const double want = -theta * (x * x * x * x / 4 - x * x / 2) - a * (0.1 * x * x + 0.5 * x * x * 0.7 + x * (-1.0) * (-0.2));
    CHECK(E[i] == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK_THROWS_AS(build_gibbs(gm, a, MeanField::zeros(2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(build_gibbs(gm, 5e3, mf), std::invalid_argument);
}

TEST_CASE("Dawson moments agree with an independent Simpson oracle") {
  oracle::Dawson d;
  GridModel gm = discretize(catalog_lookup("dawson"));
  for (double a : {0.5, 1.5, 3.0})
    for (double r : {0.0, 0.3, -0.8}) {
      GibbsMeasure mu = build_gibbs(gm, a, k_field(r));
      auto ref = d.measure(a, r);
      for (int p = 1; p <= 4; ++p) {
        auto f = [p](double x) { return std::pow(x, p); };
        CHECK(std::abs(moment(mu, f) - ref.expect(f)) < 1e-10);
      }
    }
}

TEST_CASE("symmetry and normalization") {
  GridModel gm = discretize(catalog_lookup("dawson"));
  GibbsMeasure mu = build_gibbs(gm, 2.0, k_field(0.0));
  const Eigen::Index n = gm.size();
  for (Eigen::Index i = 0; i < n / 2; ++i)
    CHECK(std::abs(mu.density[i] - mu.density[n - 1 - i]) <= 1e-12 * mu.density.maxCoeff());
  CHECK(std::abs(mu.mass().sum() - 1) < 1e-13);
  CHECK(std::abs(moment(mu, [](double x) { return x; })) < 1e-12);
}

TEST_CASE("log-sum-exp keeps extreme exponents finite") {
  GridModel gm = discretize(catalog_lookup("dawson"));
  Eigen::VectorXd l = gibbs_exponent(gm, 1.0, k_field(0.2));
  GibbsMeasure a = normalize_log_density(gm.grid, l, 1.0);
  const double peak = a.density.maxCoeff();
  // the shift itself rounds the exponent: an ulp of 1e3 is 1e-13, of 5e4 about 7e-12
  for (double c : {1e3, 5e4}) {
    GibbsMeasure b = normalize_log_density(gm.grid, (l.array() + c).matrix(), 1.0);
    CHECK((a.density - b.density).lpNorm<Eigen::Infinity>() < 1e-15 * c * peak);
    CHECK(b.log_norm - a.log_norm == doctest::Approx(c).epsilon(1e-14));
    CHECK((a.log_density() - b.log_density()).lpNorm<Eigen::Infinity>() < 1e-15 * c);
  }

  Eigen::VectorXd bad = l;
  bad[17] = std::nan("");
  try {
    normalize_log_density(gm.grid, bad, 1.0);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.node() == gm.nodes()[17]);
  }
}

TEST_CASE("deep tails stay positive and carry the exact log-density") {
  GridModel gm = discretize(catalog_lookup("xsin"));
  GibbsMeasure mu = build_gibbs(gm, 6.0, MeanField::zeros(0, 2));
  CHECK((mu.density.array() > 0).all());
  const Eigen::VectorXd want = gibbs_exponent(gm, 6.0, MeanField::zeros(0, 2)).array() - mu.log_norm;
  CHECK((mu.log_density() - want).lpNorm<Eigen::Infinity>() < 1e-12 * want.cwiseAbs().maxCoeff());
  CHECK(mu.log_density()[0] < -1500);
}

TEST_CASE("pi projection is centered") {
  GridModel gm = discretize(catalog_lookup("xsin"));
  GibbsMeasure mu = build_gibbs(gm, 5.94468752, MeanField::zeros(0, 2));
  CHECK(std::abs(moment(mu, pi_project(mu, [](double x) { return x * x * x * x; }))) < 1e-12);
  CHECK(pi_project(mu, [](double) { return 1.0; }).lpNorm<Eigen::Infinity>() < 1e-15);
  MeanField mf = mean_field_of(gm, mu);
  CHECK(mf.r_k.lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(std::abs(moment(mu, [](double x) { return x * x; }) - 0.39618539) < 5e-4);
}

TEST_CASE("stationarity residual separates fixed points from perturbations") {
  GridModel gm = discretize(catalog_lookup("dawson"));
  FixedPointResult fp = solve_fixed_point(gm, 3.0, k_field(1.0), {1e-13, 500, 1e-3});
  REQUIRE(fp.converged);
  REQUIRE(std::abs(fp.meanfield.r_k[0]) > 0.1);
  auto r = stationarity_residual(fp.measure, gm, {poly(2), poly(4)});
  for (double v : r) CHECK(std::abs(v) < 1e-10);

  GibbsMeasure off = build_gibbs(gm, 3.0, k_field(fp.meanfield.r_k[0] + 0.1));
  auto s = stationarity_residual(off, gm, {poly(1), poly(2), poly(4)});
  double worst = 0;
  for (double v : s) worst = std::max(worst, std::abs(v));
  CHECK(worst > 1e-3);

  TestFunction incomplete{[](double x) { return x; }, {}, {}};
  CHECK_THROWS_AS(stationarity_residual(fp.measure, gm, {incomplete}), std::invalid_argument);
}

TEST_CASE("convolution exponent against a direct double sum") {
  ModelSpec m = catalog_lookup("granular-sin");
  auto grid = std::make_shared<const Quadrature>(build_grid(m.domain_L, 20, 10));
  GridModel gm = discretize(m, grid);
  GibbsMeasure mu = normalize_log_density(grid, -gm.V0, 1.0);
  Eigen::VectorXd E = convolution_exponent(gm, 1.0, mu.density);
  for (Eigen::Index i = 0; i < gm.size(); i += 23) {
    const double x = gm.nodes()[i];
    double s = 0;
    for (Eigen::Index j = 0; j < gm.size(); ++j) {
      const double z = x - gm.nodes()[j];
      s += grid->weights[j] * mu.density[j] * (1 + z * z) * std::sin(z);
    }
    CHECK(E[i] == doctest::Approx(-m.V0(x) + s).epsilon(1e-12));
  }
}

TEST_CASE("density csv") {
  GridModel gm = discretize(catalog_lookup("dawson"));
  GibbsMeasure mu = build_gibbs(gm, 1.0, k_field(0.0));
  std::ostringstream os;
  write_density_csv(os, mu);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,density");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == gm.size());
}
