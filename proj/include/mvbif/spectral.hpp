#pragma once

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "mvbif/gibbs.hpp"
#include "mvbif/selfconsistency.hpp"

namespace mvbif {

enum class KernelPart { Full, V2Only, K2Only };

/// alpha * pi K pi discretized on the grid, conjugated by sqrt(w rho):
/// A_ij = alpha sqrt(w_i rho_i) Kc(x_i, x_j) sqrt(w_j rho_j) with Kc the
/// doubly centered kernel.
struct NystromOperator {
  Eigen::MatrixXd matrix;
  std::shared_ptr<const Quadrature> grid;
  double alpha = 0.0;
  Eigen::VectorXd sqrt_mass;

  /// The same operator as alpha Kc(x_i, x_j) w_j rho_j (similar to `matrix`).
  Eigen::MatrixXd collocation() const;
};

/// `mu` is the trivial-branch measure at alpha. For convolution models the
/// kernel is V(x, y) = -H(x - y), all of it counted as K2.
NystromOperator nystrom_build(const GridModel& gm, const GibbsMeasure& mu, double alpha,
                              KernelPart part = KernelPart::Full);

/// alpha Kc Cov for the stacked basis (v, k): the same nonzero spectrum as
/// the Nystrom matrix of a finite-rank kernel, in (l+m) dimensions.
Eigen::MatrixXd moment_matrix(const GridModel& gm, const GibbsMeasure& mu, double alpha,
                              KernelPart part = KernelPart::Full);

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;
  double det2 = 1.0;
  int sign = 1;
  double alpha = 0.0;
  double min_abs_one_plus_kappa = 1.0;
};

/// prod (1 + kappa) exp(-kappa) over the eigenvalues of `matrix`.
SpectralReport det2(const Eigen::MatrixXd& matrix, double alpha = 0.0);
SpectralReport det2(const NystromOperator& op);

struct ScanSample {
  double alpha = 0.0;
  bool valid = false;
  SpectralReport report;
};

struct CrossingScan {
  std::vector<ScanSample> samples;
  std::vector<std::pair<double, double>> brackets;
};

/// det2 of the full operator on `steps` equally spaced alphas in [lo, hi],
/// re-solving the trivial branch with warm starts. Finite-rank models only.
CrossingScan crossing_scan(const GridModel& gm, double alpha_lo, double alpha_hi, int steps,
                           const SolverOptions& opt = {});

/// Columns alpha, det2, sign, min_abs_one_plus_kappa (invalid samples: nan).
void write_scan_csv(std::ostream& os, const CrossingScan& scan);

struct InvertibilityCheck {
  bool invertible = true;
  double margin = 1.0;
};

/// min |1 + kappa| over the V2 part alone; invertible when the margin exceeds 1e-6.
InvertibilityCheck invertibility_check(const GridModel& gm, double alpha,
                                       const SolverOptions& opt = {});
InvertibilityCheck invertibility_check(const GridModel& gm, const GibbsMeasure& trivial);

}  // namespace mvbif
