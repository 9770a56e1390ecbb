#include "mvbif/selfconsistency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mvbif {

namespace {

using VecMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct IterationOutcome {
  Eigen::VectorXd r;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

double sup(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Forward-difference Newton step on F(r) - r; false when the Jacobian is singular.
bool newton_step(const VecMap& F, const Eigen::VectorXd& r, const Eigen::VectorXd& Fr,
                 Eigen::VectorXd& step) {
  const Eigen::Index d = r.size();
  Eigen::MatrixXd A(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd rp = r;
    const double h = 1e-6 * (1.0 + std::abs(r[j]));
    rp[j] += h;
    A.col(j) = (F(rp) - Fr) / h;
  }
  A -= Eigen::MatrixXd::Identity(d, d);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) return false;
  step = lu.solve(r - Fr);
  return step.allFinite();
}

IterationOutcome iterate(const VecMap& F, Eigen::VectorXd r, const SolverOptions& opt,
                         bool allow_newton) {
  IterationOutcome out;
  Eigen::VectorXd Fr = F(r);
  double res = sup(Fr - r);
  out.trace.push_back(res);
  double lambda = 1.0;
  int it = 0;
  while (res >= opt.tol && it < opt.max_iter) {
    ++it;
    if (allow_newton && res < opt.newton_switch) {
      Eigen::VectorXd step;
      if (newton_step(F, r, Fr, step)) {
        Eigen::VectorXd rn = r + step;
        Eigen::VectorXd Fn = F(rn);
        double resn = sup(Fn - rn);
        if (resn < res) {
          r = std::move(rn);
          Fr = std::move(Fn);
          res = resn;
          out.trace.push_back(res);
          continue;
        }
      }
    }
    Eigen::VectorXd rn = (1.0 - lambda) * r + lambda * Fr;
    Eigen::VectorXd Fn = F(rn);
    double resn = sup(Fn - rn);
    lambda = resn > res ? std::max(0.05, lambda / 2) : std::min(1.0, lambda * 1.2);
    r = std::move(rn);
    Fr = std::move(Fn);
    res = resn;
    out.trace.push_back(res);
  }
  out.r = std::move(r);
  out.residual = res;
  out.iterations = it;
  out.converged = res < opt.tol;
  return out;
}

void check_options(const SolverOptions& opt) {
  if (!(opt.tol > 0)) throw std::invalid_argument("solver tolerance must be > 0");
  if (opt.max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
}

}  // namespace

MeanField selfconsistency_map(const GridModel& gm, double alpha, const MeanField& mf) {
  return mean_field_of(gm, build_gibbs(gm, alpha, mf));
}

FixedPointResult solve_fixed_point(const GridModel& gm, double alpha, const MeanField& start,
                                   const SolverOptions& opt) {
  check_options(opt);
  const Eigen::Index l = gm.l();
  VecMap F = [&](const Eigen::VectorXd& r) {
    return selfconsistency_map(gm, alpha, MeanField::unstack(r, l)).stacked();
  };
  IterationOutcome o = iterate(F, start.stacked(), opt, true);
  FixedPointResult res;
  res.meanfield = MeanField::unstack(o.r, l);
  res.measure = build_gibbs(gm, alpha, res.meanfield);
  res.residual_inf = o.residual;
  res.iterations = o.iterations;
  res.converged = o.converged;
  res.trace = std::move(o.trace);
  return res;
}

FixedPointResult solve_trivial_branch(const GridModel& gm, double alpha,
                                      const Eigen::VectorXd& start_rv, const SolverOptions& opt) {
  check_options(opt);
  const Eigen::Index l = gm.l(), m = gm.m();
  const Eigen::VectorXd zero_k = Eigen::VectorXd::Zero(m);
  VecMap F = [&](const Eigen::VectorXd& rv) {
    return selfconsistency_map(gm, alpha, {rv, zero_k}).r_v;
  };
  Eigen::VectorXd r0 = start_rv.size() == l ? start_rv : Eigen::VectorXd::Zero(l);
  IterationOutcome o = iterate(F, r0, opt, true);
  FixedPointResult res;
  res.meanfield = {o.r, zero_k};
  res.measure = build_gibbs(gm, alpha, res.meanfield);
  res.residual_inf = o.residual;
  res.iterations = o.iterations;
  res.converged = o.converged;
  res.trace = std::move(o.trace);
  return res;
}

MultiStartResult multi_start_solve(const GridModel& gm, double alpha,
                                   const std::vector<MeanField>& starts, const SolverOptions& opt) {
  if (starts.empty()) throw std::invalid_argument("multi_start_solve: no starting points");
  MultiStartResult out;
  const double radius = 10.0 * opt.tol;
  for (const auto& s : starts) {
    FixedPointResult r = solve_fixed_point(gm, alpha, s, opt);
    if (!r.converged) {
      ++out.non_converged;
      continue;
    }
    const Eigen::VectorXd x = r.meanfield.stacked();
    bool seen = std::any_of(out.solutions.begin(), out.solutions.end(), [&](const auto& o) {
      return sup(o.meanfield.stacked() - x) < radius;
    });
    if (!seen) out.solutions.push_back(std::move(r));
  }
  return out;
}

FixedPointResult solve_density_fixed_point(const GridModel& gm, double alpha,
                                           const SolverOptions& opt) {
  check_options(opt);
  if (gm.model.is_finite_rank())
    throw std::invalid_argument("solve_density_fixed_point needs a convolution kernel");
  auto T = [&](const Eigen::VectorXd& rho) {
    return normalize_log_density(gm.grid, convolution_exponent(gm, alpha, rho), alpha).density;
  };
  const double theta = gm.model.temperature.theta(alpha);
  Eigen::VectorXd rho0 =
      normalize_log_density(gm.grid, -theta * gm.V0, alpha).density;
  // Newton on n unknowns is not worth it here; plain damped Picard.
  IterationOutcome o = iterate(T, rho0, opt, false);
  FixedPointResult res;
  res.measure = normalize_log_density(gm.grid, convolution_exponent(gm, alpha, o.r), alpha);
  res.residual_inf = o.residual;
  res.iterations = o.iterations;
  res.converged = o.converged;
  res.trace = std::move(o.trace);
  return res;
}

}  // namespace mvbif
