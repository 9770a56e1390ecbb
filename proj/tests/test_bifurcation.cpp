#include "doctest.h"

#include <cmath>

#include "mvbif/bifurcation.hpp"
#include "mvbif/errors.hpp"
#include "oracles.hpp"
#include "test_models.hpp"

using namespace mvbif;

namespace {

// Central difference of the log-density along the trivial branch.
Eigen::VectorXd fd_log_branch(const GridModel& gm, double a, double h) {
  SolverOptions o{1e-14, 500, 1e-3};
  FixedPointResult p = solve_trivial_branch(gm, a + h, {}, o);
  FixedPointResult m = solve_trivial_branch(gm, a - h, {}, o);
  REQUIRE(p.converged);
  REQUIRE(m.converged);
  return (p.measure.log_density() - m.measure.log_density()) / (2 * h);
}

}  // namespace

TEST_CASE("Brent root finder") {
  double r = brent_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0, 1e-14);
  CHECK(std::abs(r - 0.7390851332151607) < 1e-13);
  CHECK(brent_root([](double x) { return x - 0.25; }, 0.25, 1.0, 1e-12) == 0.25);
  CHECK_THROWS_AS(brent_root([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-12), BracketError);
}

TEST_CASE("numerical rank and multiplicity") {
  Eigen::Matrix3d A = Eigen::Vector3d(1.0, 1e-3, 1e-12).asDiagonal();
  CHECK(numerical_rank(A, 1e-8) == 2);
  CHECK(numerical_rank(1e-10 * A, 1e-8) == 2);
  CHECK(numerical_rank(1e-10 * A, 1e-8, 1.0) == 0);
  CHECK(numerical_rank(Eigen::MatrixXd(0, 0), 1e-8) == 0);

  CHECK(multiplicity(Eigen::Vector2d(0.0, 1.0).asDiagonal().toDenseMatrix()).count == 1);
  Multiplicity two = multiplicity(Eigen::Vector3d(1e-9, -1e-8, 2.0).asDiagonal().toDenseMatrix());
  CHECK(two.count == 2);
  CHECK_FALSE(two.odd);
  // Jordan block: algebraic multiplicity two
  Eigen::Matrix2d N{{0.0, 1.0}, {0.0, 0.0}};
  CHECK(multiplicity(N).count == 2);
}

TEST_CASE("Gram matrix against the Simpson oracle") {
  oracle::Dawson d;
  GridModel gm = discretize(catalog_lookup("dawson"));
  Eigen::MatrixXd G = gram_G(gm, 1.7);
  CHECK(std::abs(G(0, 0) - d.m2(1.7)) < 1e-10);
  Eigen::MatrixXd core = core_matrix(gm, 1.7, G);
  CHECK(core(0, 0) == doctest::Approx(1 - 1.7 * G(0, 0)).epsilon(1e-15));
}

TEST_CASE("dlog_rho matches finite differences with a V2 part") {
  GridModel gm = discretize(testmodels::with_v2(0.5));
  for (double a : {0.8, 2.0}) {
    FixedPointResult t = solve_trivial_branch(gm, a, {}, {1e-14, 500, 1e-3});
    REQUIRE(t.converged);
    Eigen::VectorXd dl = dlog_rho(gm, t.measure);
    Eigen::VectorXd fd = fd_log_branch(gm, a, 1e-4);
    CHECK((dl - fd).lpNorm<Eigen::Infinity>() < 1e-5);
    // a derivative of a normalized log-density has mean zero
    CHECK(std::abs(moment(t.measure, dl)) < 1e-12);
  }
}

TEST_CASE("dlog_rho without V2 is -pi(theta' V0 + V1)") {
  GridModel gm = discretize(catalog_lookup("dawson", 2.0));
  FixedPointResult t = solve_trivial_branch(gm, 1.1);
  Eigen::VectorXd dl = dlog_rho(gm, t.measure);
  Eigen::VectorXd U = 0.5 * gm.V0 + gm.V1;
  CHECK((dl + pi_project(t.measure, U)).lpNorm<Eigen::Infinity>() < 1e-12);
  Eigen::MatrixXd MK = m_k_matrix(gm, t.measure, dl);
  CHECK(MK(0, 0) == doctest::Approx(moment(t.measure, dl.cwiseProduct(gm.k.col(0).cwiseAbs2()))).epsilon(1e-14));
}

TEST_CASE("dlog_rho refuses a singular V2 block") {
  const double a = 1.5;
  // J tuned on the same grid measure so that 1 + alpha J Var(x^2) vanishes to rounding
  GridModel probe = discretize(testmodels::v2_only(1.0));
  GibbsMeasure mu0 = build_gibbs(probe, a, MeanField::zeros(1, 0));
  const Eigen::VectorXd x2 = probe.nodes().cwiseAbs2();
  const double var = moment(mu0, x2.cwiseAbs2()) - std::pow(moment(mu0, x2), 2);
  GridModel gm = discretize(testmodels::v2_only(-1.0 / (a * var)));
  GibbsMeasure mu = build_gibbs(gm, a, MeanField::zeros(1, 0));
  try {
    dlog_rho(gm, mu);
    FAIL("expected LinearAlgebraError");
  } catch (const LinearAlgebraError& e) {
    CHECK(e.condition_number() > 1e12);
  }
}

TEST_CASE("rank condition on hand-built inputs") {
  // core of rank one, M_K chosen so the block has full rank 3 (m = 2)
  Eigen::Matrix2d G = Eigen::Vector2d(-2.0, 2.0).asDiagonal();
  Eigen::Matrix2d Ga{{0.25, 0.0}, {0.0, 0.125}};
  // alpha0 = 2: core = I + 2 G Ga = diag(0, 1.5)
  RankCondition rc = rank_condition(G, Ga, Eigen::Matrix2d{{0.3, 0.1}, {0.1, 0.2}}, 2.0);
  CHECK(rc.rank_core == 1);
  CHECK(rc.rank_block == 3);
  CHECK(rc.holds);
  // corner with a zero (0,0) entry: -(1 + 2 * 4 * M(0,0)) = 0 when M(0,0) = -1/8
  RankCondition fails = rank_condition(G, Ga, Eigen::Matrix2d{{-0.125, 0.0}, {0.0, 0.2}}, 2.0);
  CHECK(fails.rank_block == 2);
  CHECK_FALSE(fails.holds);
  CHECK_THROWS_AS(rank_condition(G, Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(), 2.0), LinearAlgebraError);
  CHECK_THROWS_AS(rank_condition(G, Eigen::Matrix3d::Identity(), Eigen::Matrix2d::Zero(), 2.0),
                  std::invalid_argument);
}

TEST_CASE("Dawson full report") {
  GridModel gm = discretize(catalog_lookup("dawson"));
  BifurcationReport r = full_report(gm, 1.5, 3.0);
  oracle::Dawson d;
  const double a_ref = oracle::bisect([&](double a) { return a * d.m2(a) - 1; }, 1.5, 3.0, 1e-10);
  CHECK(std::abs(r.alpha0 - a_ref) < 1e-8);
  CHECK(r.multiplicity == 1);
  CHECK(r.scalar_check_used);
  CHECK(r.one_plus_M0 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.rank_condition_holds);
  CHECK(r.det2_sign_change);
  CHECK(r.verdict);
  CHECK(r.sigma0 == doctest::Approx(std::sqrt(2 / r.alpha0)));
}

TEST_CASE("pipeline failures carry the stage") {
  GridModel gm = discretize(catalog_lookup("dawson"));
  try {
    full_report(gm, 0.5, 1.0);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "locate");
  }
  try {
    full_report(discretize(catalog_lookup("granular-sin")), 0.5, 1.0);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "locate");
  }
}

TEST_CASE("Dawson audit for other beta") {
  for (double beta : {0.5, 2.0}) {
    DawsonAudit au = dawson_audit(beta);
    REQUIRE(au.found);
    CHECK(std::abs(au.alpha0_m2 - 1) < 1e-10);
    CHECK(std::abs(au.ito_residual_2) < 1e-8);
    CHECK(std::abs(au.ito_residual_4) < 1e-8);
    CHECK(std::abs(au.one_plus_M0_integral - au.one_plus_M0_closed) < 1e-8);
  }
  CHECK_THROWS_AS(dawson_audit(-1.0), std::invalid_argument);
}
