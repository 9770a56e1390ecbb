#pragma once

#include <vector>

#include "mvbif/gibbs.hpp"

namespace mvbif {

struct FixedPointResult {
  MeanField meanfield;
  GibbsMeasure measure;
  double residual_inf = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 500;
  /// Picard hands over to Newton once the residual falls below this.
  double newton_switch = 1e-3;
};

/// F(r) = (mu(v_i), mu(k_j)) for mu = build_gibbs(gm, alpha, r).
MeanField selfconsistency_map(const GridModel& gm, double alpha, const MeanField& mf);

/// Damped Picard with adaptive lambda, then forward-difference Newton.
/// Non-convergence is reported through `converged`, not thrown.
FixedPointResult solve_fixed_point(const GridModel& gm, double alpha, const MeanField& start,
                                   const SolverOptions& opt = {});

/// The branch of the map with the K2 part removed: r_k is held at zero
/// and only r_v is iterated. `start` seeds r_v.
FixedPointResult solve_trivial_branch(const GridModel& gm, double alpha,
                                      const Eigen::VectorXd& start_rv = {},
                                      const SolverOptions& opt = {});

struct MultiStartResult {
  std::vector<FixedPointResult> solutions;
  int non_converged = 0;
};

/// Solves from each start and keeps one representative per cluster of
/// converged mean fields closer than 10 tol in sup norm.
MultiStartResult multi_start_solve(const GridModel& gm, double alpha,
                                   const std::vector<MeanField>& starts,
                                   const SolverOptions& opt = {});

/// Picard on densities for convolution kernels, started from the Gibbs
/// density of V0 alone. Converged when sup |rho_{n+1} - rho_n| < tol.
FixedPointResult solve_density_fixed_point(const GridModel& gm, double alpha,
                                           const SolverOptions& opt = {});

}  // namespace mvbif
