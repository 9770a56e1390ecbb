#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mvbif/errors.hpp"
#include "mvbif/gibbs.hpp"
#include "mvbif/model.hpp"
#include "mvbif/model_io.hpp"
#include "test_models.hpp"

using namespace mvbif;

namespace {

std::string fixture(const char* name) { return std::string(MVBIF_FIXTURE_DIR) + "/" + name; }

void check_derivative(const SmoothFn& f) {
  for (double x : {-2.3, -0.7, 0.35, 1.9}) {
    const double h = 1e-5;
    const double fd = (f(x + h) - f(x - h)) / (2 * h);
    CHECK(std::abs(f.derivative(x) - fd) < 1e-6 * (1 + std::abs(fd)));
  }
}

}  // namespace

TEST_CASE("catalog") {
  auto names = catalog_names();
  CHECK(names.size() == 5);
  for (const auto& n : names) {
    ModelSpec m = catalog_lookup(n);
    CHECK(m.name == n);
    CHECK_NOTHROW(validate(m, default_grid(m.domain_L)));
    check_derivative(m.V0);
    if (m.is_finite_rank()) {
      const auto& k = m.finite_rank();
      check_derivative(k.V1);
      for (const auto& b : k.v_basis) check_derivative(b);
      if (n != "singular-theta")
        for (const auto& b : k.k_basis) check_derivative(b);
    } else {
      check_derivative(m.general().H);
    }
  }
  CHECK_THROWS_AS(catalog_lookup("no-such-model"), LookupError);
}

TEST_CASE("Dawson parameters follow beta") {
  ModelSpec d = catalog_lookup("dawson", 2.0);
  CHECK(d.beta == 2.0);
  CHECK(d.temperature.theta(3.0) == doctest::Approx(1.5));
  CHECK(d.alpha_for_sigma(2.0) == doctest::Approx(1.0));
  CHECK(d.sigma_for_alpha(1.0) == doctest::Approx(2.0));

  ModelSpec v = catalog_lookup("vfp-dawson", 1.0);
  CHECK(v.dimension == Dimension::ProductForm2D);
  CHECK(v.alpha_for_sigma(2.0) == doctest::Approx(0.25));
  CHECK(v.y_marginal_variance(0.25) == doctest::Approx(2.0));  // sigma^2 / 2
}

TEST_CASE("validation rejects malformed kernels") {
  ModelSpec m = testmodels::with_v2();
  Quadrature q = default_grid(6.0);
  CHECK_NOTHROW(validate(m, q));

  ModelSpec bad = m;
  auto& k = std::get<FiniteRankKernel>(bad.kernel);
  k.k_basis.push_back(testmodels::fn([](double x) { return 2 * x; }, [](double) { return 2.0; }));
  k.G = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(validate(bad, q), ValidationError);

  bad = m;
  std::get<FiniteRankKernel>(bad.kernel).v_basis[0] =
      testmodels::fn([](double) { return 3.0; }, [](double) { return 0.0; });
  CHECK_THROWS_AS(validate(bad, q), ValidationError);

  bad = m;
  auto& k2 = std::get<FiniteRankKernel>(bad.kernel);
  k2.k_basis.push_back(testmodels::fn([](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }));
  k2.G = Eigen::Matrix2d{{1.0, 0.5}, {0.5 + 1e-15, 1.0}};
  CHECK_THROWS_AS(validate(bad, q), ValidationError);

  bad = m;
  std::get<FiniteRankKernel>(bad.kernel).J = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(validate(bad, q), ValidationError);
}

TEST_CASE("model file reproduces the catalog Dawson model") {
  ModelSpec f = load_model_file(fixture("dawson.json"));
  ModelSpec c = catalog_lookup("dawson");
  CHECK(f.name == "dawson-file");
  CHECK(f.symmetric);
  CHECK(f.sigma_scale == 2.0);
  GibbsMeasure a = build_gibbs(f, 1.5, MeanField{Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, 0.3)});
  GibbsMeasure b = build_gibbs(c, 1.5, MeanField{Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, 0.3)});
  CHECK((a.density - b.density).lpNorm<Eigen::Infinity>() < 1e-12 * b.density.maxCoeff());
}

TEST_CASE("model file errors carry a JSON pointer") {
  auto pointer_of = [](const std::string& text) {
    try {
      load_model_text(text);
    } catch (const ParseError& e) {
      return e.pointer();
    }
    return std::string("<none>");
  };
  const std::string base =
      R"("name": "m", "theta": {"kind": "linear", "slope": 1}, "beta": 1, "domain_L": 6)";
  CHECK(pointer_of("{" + base + "}") == "/V0");
  CHECK(pointer_of("{" + base + R"(, "V0": "x^4 +")" + "}") == "/V0");
  CHECK(pointer_of("{" + base + R"(, "V0": "x^4", "k_basis": ["x", "sin(x"], "G": [[1,0],[0,1]])" + "}") ==
        "/k_basis/1");
  CHECK(pointer_of("{" + base + R"(, "V0": "x^4", "k_basis": ["x"], "G": [[1, 2]])" + "}") == "/G/0");
  CHECK(pointer_of("{" + base + R"(, "V0": "x^4", "k_basis": ["x"], "G": [["a"]])" + "}") == "/G/0/0");
  CHECK(pointer_of(R"({"name": "m", "V0": "x^4", "beta": 1, "domain_L": 6,
                       "theta": {"kind": "cubic"}})") == "/theta/kind");
  CHECK(pointer_of("{ not json") == "");
  CHECK_THROWS_AS(load_model_file(fixture("missing.json")), ParseError);
  CHECK_THROWS_AS(load_model_file(fixture("asymmetric_J.json")), ValidationError);
}

TEST_CASE("theta given as an expression in alpha") {
  ModelSpec m = load_model_text(R"({
    "name": "m", "V0": "x^4/4", "beta": 1, "domain_L": 5,
    "theta": {"kind": "expr", "body": "alpha + alpha^2", "deriv": "1 + 2*alpha"},
    "alpha_range": [0.1, 9]})");
  CHECK(m.temperature.theta(2.0) == 6.0);
  CHECK(m.temperature.theta_prime(2.0) == 5.0);
  CHECK(m.temperature.contains(1.0));
  CHECK_FALSE(m.temperature.contains(10.0));
}
