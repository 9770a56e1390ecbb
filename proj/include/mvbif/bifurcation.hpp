#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "mvbif/selfconsistency.hpp"
#include "mvbif/spectral.hpp"

namespace mvbif {

/// G(alpha)_ij = mu_alpha(k_i k_j) on the trivial branch.
Eigen::MatrixXd gram_G(const GridModel& gm, double alpha, const SolverOptions& opt = {});
Eigen::MatrixXd gram_G(const GridModel& gm, const GibbsMeasure& trivial);

/// I + alpha G G(alpha).
Eigen::MatrixXd core_matrix(const GridModel& gm, double alpha, const Eigen::MatrixXd& G_alpha);

/// Brent's method on [lo, hi]; throws BracketError without a sign change.
double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                  int max_iter = 200);

/// Root of det(I + alpha G G(alpha)) to |d alpha| < tol.
double locate_candidate(const GridModel& gm, double alpha_lo, double alpha_hi, double tol,
                        const SolverOptions& opt = {});

struct Multiplicity {
  int count = 0;
  bool odd = false;
};

/// Number of eigenvalues with |lambda| < rel_tol max(1, spectral radius).
Multiplicity multiplicity(const Eigen::MatrixXd& core, double rel_tol = 1e-5);

/// d/d alpha log rho_alpha at alpha0 on the trivial branch measure `mu`.
/// Throws LinearAlgebraError if Cov(v) or I + alpha0 J Cov(v) is singular.
Eigen::VectorXd dlog_rho(const GridModel& gm, const GibbsMeasure& mu);
Eigen::VectorXd dlog_rho(const GridModel& gm, double alpha0, const SolverOptions& opt = {});

/// mu(dlog k_i k_j).
Eigen::MatrixXd m_k_matrix(const GridModel& gm, const GibbsMeasure& mu, const Eigen::VectorXd& dlog);

struct RankCondition {
  bool holds = false;
  int rank_block = 0;
  int rank_core = 0;
  Eigen::MatrixXd block;
  double G_condition = 0.0;
};

/// Block [[0, I + a G G(a)], [I + a G G(a), -(I + a G(a)^-1 M_K)]] and its
/// SVD rank at threshold svd_tol * sigma_max. Holds iff
/// rank_block == m + rank_core.
RankCondition rank_condition(const Eigen::MatrixXd& G, const Eigen::MatrixXd& G_alpha0,
                             const Eigen::MatrixXd& M_K, double alpha0, double svd_tol = 1e-8);

/// Singular values above rel_tol * max(sigma_max, floor).
int numerical_rank(const Eigen::MatrixXd& A, double rel_tol, double floor = 0.0);

struct BifurcationReport {
  std::string model;
  double alpha0 = 0.0;
  double sigma0 = 0.0;
  Eigen::VectorXd trivial_rv;
  Eigen::MatrixXd G_alpha0;
  Eigen::MatrixXd J_alpha0;  // Cov_mu(v_i, v_j)
  Eigen::MatrixXd core;
  Eigen::MatrixXd M_K;
  Eigen::MatrixXd block;
  int rank_block = 0;
  int rank_core = 0;
  int multiplicity = 0;
  bool multiplicity_odd = false;
  double min_abs_core_eigenvalue = 0.0;
  bool rank_condition_holds = false;
  /// m = 1 only: 1 + alpha0 M_K / G(alpha0), the scalar replacing the rank test.
  bool scalar_check_used = false;
  double one_plus_M0 = 0.0;
  bool v2_invertible = true;
  double v2_margin = 1.0;
  double det2_below = 0.0;
  double det2_above = 0.0;
  bool det2_sign_change = false;
  bool verdict = false;
};

struct ReportOptions {
  double root_tol = 1e-12;
  double multiplicity_tol = 1e-5;
  double svd_tol = 1e-8;
  /// det2 is compared at alpha0 -/+ det2_offset.
  double det2_offset = 0.1;
  SolverOptions solver{1e-13, 500, 1e-3};
};

/// locate -> gram -> multiplicity -> dlog -> m_k -> rank, plus the V2
/// invertibility and det2 sign checks. Failures carry the stage name.
BifurcationReport full_report(const GridModel& gm, double alpha_lo, double alpha_hi,
                              const ReportOptions& opt = {});

struct DawsonAudit {
  double beta = 1.0;
  bool found = false;
  double alpha0 = 0.0;
  double sigma0 = 0.0;
  bool in_interval = false;  // alpha0 in [1, 3]
  double m2 = 0.0, m4 = 0.0, m6 = 0.0;
  double alpha0_m2 = 0.0;
  double ito_residual_2 = 0.0;  // -2 m4 + 2 (1 - beta) m2 + sigma0^2
  double ito_residual_4 = 0.0;  // -4 m6 + 4 (1 - beta) m4 + 6 sigma0^2 m2
  double hankel = 0.0;
  double one_plus_M0_integral = 0.0;
  double one_plus_M0_closed = 0.0;
};

/// Closed-form checks for the Dawson model at its critical alpha0,
/// searched for in [0.5, 3.5]. A missing root is reported, not thrown.
DawsonAudit dawson_audit(double beta, const SolverOptions& opt = {1e-13, 500, 1e-3});

}  // namespace mvbif
