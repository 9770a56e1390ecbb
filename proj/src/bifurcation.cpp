#include "mvbif/bifurcation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mvbif/errors.hpp"

namespace mvbif {

namespace {

FixedPointResult trivial_or_throw(const GridModel& gm, double alpha, const Eigen::VectorXd& warm,
                                  const SolverOptions& opt) {
  FixedPointResult br = solve_trivial_branch(gm, alpha, warm, opt);
  if (!br.converged) {
    std::ostringstream os;
    os << "trivial branch did not converge at alpha = " << alpha << " (residual " << br.residual_inf
       << ")";
    throw NumericError(os.str());
  }
  return br;
}

// max(sigma_max, scale) / sigma_min, infinite for an exactly singular matrix.
// `scale` keeps small matrices honest: a 1x1 matrix always has sigma_max / sigma_min = 1.
double condition(const Eigen::MatrixXd& A, double scale = 0.0) {
  if (A.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  return lo > 0 ? std::max(s(0), scale) / lo : std::numeric_limits<double>::infinity();
}

constexpr double kSingularCondition = 1e12;

}  // namespace

Eigen::MatrixXd gram_G(const GridModel& gm, const GibbsMeasure& trivial) {
  return gm.k.transpose() * trivial.mass().asDiagonal() * gm.k;
}

Eigen::MatrixXd gram_G(const GridModel& gm, double alpha, const SolverOptions& opt) {
  return gram_G(gm, trivial_or_throw(gm, alpha, {}, opt).measure);
}

Eigen::MatrixXd core_matrix(const GridModel& gm, double alpha, const Eigen::MatrixXd& G_alpha) {
  const auto& G = gm.model.finite_rank().G;
  return Eigen::MatrixXd::Identity(G.rows(), G.rows()) + alpha * G * G_alpha;
}

double brent_root(const std::function<double(double)>& f, double a, double b, double tol,
                  int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) {
    std::ostringstream os;
    os << "no sign change on [" << a << ", " << b << "]: f = " << fa << ", " << fb;
    throw BracketError(os.str());
  }
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic interpolation, secant when only two points
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2 * xm * s;
        q = 1 - s;
      } else {
        double r = fb / fc;
        q = fa / fc;
        p = s * (2 * xm * q * (q - r) - (b - a) * (r - 1));
        q = (q - 1) * (r - 1) * (s - 1);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2 * p < std::min(3 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw NumericError("brent_root: iteration limit reached");
}

double locate_candidate(const GridModel& gm, double lo, double hi, double tol,
                        const SolverOptions& opt) {
  if (!(lo < hi)) throw std::invalid_argument("locate_candidate: need lo < hi");
  Eigen::VectorXd warm;
  auto f = [&](double alpha) {
    FixedPointResult br = trivial_or_throw(gm, alpha, warm, opt);
    warm = br.meanfield.r_v;
    return core_matrix(gm, alpha, gram_G(gm, br.measure)).determinant();
  };
  return brent_root(f, lo, hi, tol);
}

Multiplicity multiplicity(const Eigen::MatrixXd& core, double rel_tol) {
  Multiplicity out;
  if (core.size() == 0) return out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(core, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  const double radius = ev.cwiseAbs().maxCoeff();
  const double thr = rel_tol * std::max(1.0, radius);
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) < thr) ++out.count;
  out.odd = out.count % 2 == 1;
  return out;
}

Eigen::VectorXd dlog_rho(const GridModel& gm, const GibbsMeasure& mu) {
  const ModelSpec& model = gm.model;
  const auto& ker = model.finite_rank();
  const double alpha = mu.alpha;
  const Eigen::VectorXd U = model.temperature.theta_prime(alpha) * gm.V0 + gm.V1;
  const Eigen::VectorXd piU = pi_project(mu, U);
  const Eigen::Index l = gm.l();
  if (l == 0) return -piU;

  const Eigen::VectorXd w = mu.mass();
  const Eigen::VectorXd r = gm.v.transpose() * w;
  Eigen::MatrixXd B = gm.v;
  B.rowwise() -= r.transpose();
  const Eigen::MatrixXd C = B.transpose() * w.asDiagonal() * B;
  const double cC = condition(C, (gm.v.cwiseAbs2().transpose() * w).maxCoeff());
  if (cC > kSingularCondition)
    throw LinearAlgebraError("dlog_rho: covariance of the v basis is singular", cC);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(l, l) + alpha * C * ker.J;
  const double cM = condition(M, 1.0);
  if (cM > kSingularCondition)
    throw LinearAlgebraError("dlog_rho: I + alpha J Cov(v) is singular", cM);

  // dlog = -pi U - pi v (s + alpha J p), with p = d r / d alpha solving
  // (I + alpha C J) p = -(mu(pi v U) + C s) and s = J r.
  const Eigen::VectorXd s = ker.J * r;
  const Eigen::VectorXd b = B.transpose() * w.cwiseProduct(U);
  const Eigen::VectorXd p = M.fullPivLu().solve(-(b + C * s));
  const Eigen::VectorXd a = s + alpha * ker.J * p;
  return -piU - B * a;
}

Eigen::VectorXd dlog_rho(const GridModel& gm, double alpha0, const SolverOptions& opt) {
  return dlog_rho(gm, trivial_or_throw(gm, alpha0, {}, opt).measure);
}

Eigen::MatrixXd m_k_matrix(const GridModel& gm, const GibbsMeasure& mu, const Eigen::VectorXd& dlog) {
  return gm.k.transpose() * mu.mass().cwiseProduct(dlog).asDiagonal() * gm.k;
}

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol, double floor) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const double thr = rel_tol * std::max(s(0), floor);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr && s(i) > 0) ++r;
  return r;
}

RankCondition rank_condition(const Eigen::MatrixXd& G, const Eigen::MatrixXd& G_alpha0,
                             const Eigen::MatrixXd& M_K, double alpha0, double svd_tol) {
  const Eigen::Index m = G.rows();
  if (G.cols() != m || G_alpha0.rows() != m || G_alpha0.cols() != m || M_K.rows() != m ||
      M_K.cols() != m)
    throw std::invalid_argument("rank_condition: inputs must be m x m");
  RankCondition rc;
  rc.G_condition = condition(G_alpha0);
  if (rc.G_condition > kSingularCondition)
    throw LinearAlgebraError("rank_condition: G(alpha0) is singular", rc.G_condition);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd core = I + alpha0 * G * G_alpha0;
  const Eigen::MatrixXd corner = -(I + alpha0 * G_alpha0.fullPivLu().solve(M_K));
  rc.block = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  rc.block.topRightCorner(m, m) = core;
  rc.block.bottomLeftCorner(m, m) = core;
  rc.block.bottomRightCorner(m, m) = corner;
  rc.rank_block = numerical_rank(rc.block, svd_tol);
  // core = I + perturbation: an all-zero core at the root must read as rank 0
  rc.rank_core = numerical_rank(core, svd_tol, 1.0);
  rc.holds = rc.rank_block == m + rc.rank_core;
  return rc;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

BifurcationReport full_report(const GridModel& gm, double lo, double hi, const ReportOptions& opt) {
  BifurcationReport rep;
  rep.model = gm.model.name;
  stage("locate", [&] {
    if (!gm.model.is_finite_rank())
      throw std::invalid_argument("the bifurcation pipeline needs a finite-rank kernel");
    rep.alpha0 = locate_candidate(gm, lo, hi, opt.root_tol, opt.solver);
    rep.sigma0 = gm.model.sigma_for_alpha(rep.alpha0);
  });
  const double a0 = rep.alpha0;
  const FixedPointResult br =
      stage("branch", [&] { return trivial_or_throw(gm, a0, {}, opt.solver); });
  const GibbsMeasure& mu = br.measure;
  rep.trivial_rv = br.meanfield.r_v;

  stage("gram", [&] {
    rep.G_alpha0 = gram_G(gm, mu);
    rep.core = core_matrix(gm, a0, rep.G_alpha0);
  });
  stage("multiplicity", [&] {
    Multiplicity mult = multiplicity(rep.core, opt.multiplicity_tol);
    rep.multiplicity = mult.count;
    rep.multiplicity_odd = mult.odd;
    Eigen::EigenSolver<Eigen::MatrixXd> es(rep.core, false);
    rep.min_abs_core_eigenvalue = es.eigenvalues().cwiseAbs().minCoeff();
  });
  const Eigen::VectorXd dlog = stage("dlog", [&] {
    Eigen::MatrixXd B = gm.v;
    B.rowwise() -= (gm.v.transpose() * mu.mass()).transpose();
    rep.J_alpha0 = B.transpose() * mu.mass().asDiagonal() * B;
    return dlog_rho(gm, mu);
  });
  stage("m_k", [&] { rep.M_K = m_k_matrix(gm, mu, dlog); });
  stage("rank", [&] {
    const auto& G = gm.model.finite_rank().G;
    RankCondition rc = rank_condition(G, rep.G_alpha0, rep.M_K, a0, opt.svd_tol);
    rep.block = rc.block;
    rep.rank_block = rc.rank_block;
    rep.rank_core = rc.rank_core;
    rep.rank_condition_holds = rc.holds;
    if (gm.m() == 1) {
      // the block degenerates; the condition is invertibility of 1 + M0
      rep.scalar_check_used = true;
      rep.one_plus_M0 = 1.0 + a0 * rep.M_K(0, 0) / rep.G_alpha0(0, 0);
      rep.rank_condition_holds = std::abs(rep.one_plus_M0) > opt.svd_tol;
    }
  });
  stage("invertibility", [&] {
    InvertibilityCheck ic = invertibility_check(gm, mu);
    rep.v2_invertible = ic.invertible;
    rep.v2_margin = ic.margin;
  });
  stage("det2", [&] {
    auto at = [&](double alpha) {
      FixedPointResult b = trivial_or_throw(gm, alpha, br.meanfield.r_v, opt.solver);
      return det2(nystrom_build(gm, b.measure, alpha)).det2;
    };
    rep.det2_below = at(a0 - opt.det2_offset);
    rep.det2_above = at(a0 + opt.det2_offset);
    rep.det2_sign_change = rep.det2_below * rep.det2_above < 0;
  });
  rep.verdict = rep.multiplicity_odd && rep.rank_condition_holds;
  return rep;
}

DawsonAudit dawson_audit(double beta, const SolverOptions& opt) {
  if (!(beta > 0)) throw std::invalid_argument("dawson_audit: beta must be > 0");
  DawsonAudit au;
  au.beta = beta;
  const GridModel gm = discretize(catalog_lookup("dawson", beta));
  const Eigen::VectorXd x = gm.nodes();
  const Eigen::VectorXd x2 = x.cwiseProduct(x);
  auto trivial = [&](double alpha) { return trivial_or_throw(gm, alpha, {}, opt).measure; };
  auto f = [&](double alpha) { return 1.0 - alpha * moment(trivial(alpha), x2); };
  try {
    au.alpha0 = brent_root(f, 0.5, 3.5, 1e-13);
  } catch (const BracketError&) {
    return au;
  }
  au.found = true;
  const double a0 = au.alpha0;
  au.sigma0 = std::sqrt(2.0 * beta / a0);
  au.in_interval = a0 >= 1.0 && a0 <= 3.0;
  const GibbsMeasure mu = trivial(a0);
  au.m2 = moment(mu, x2);
  au.m4 = moment(mu, x2.cwiseProduct(x2));
  au.m6 = moment(mu, x2.cwiseProduct(x2).cwiseProduct(x2));
  au.alpha0_m2 = a0 * au.m2;
  const double s2 = au.sigma0 * au.sigma0;
  au.ito_residual_2 = -2 * au.m4 + 2 * (1 - beta) * au.m2 + s2;
  au.ito_residual_4 = -4 * au.m6 + 4 * (1 - beta) * au.m4 + 6 * s2 * au.m2;
  const double m2 = au.m2, m4 = au.m4, m6 = au.m6;
  au.hankel = m2 * m4 * m6 - m4 * m4 * m4 + m2 * m2 * m4 * m4 - m2 * m2 * m2 * m6;
  const Eigen::VectorXd dlog = dlog_rho(gm, mu);
  au.one_plus_M0_integral = 1.0 + a0 * a0 * moment(mu, dlog.cwiseProduct(x2));
  au.one_plus_M0_closed = ((3 - a0) * beta + (a0 - 1)) / (4 * beta);
  return au;
}

}  // namespace mvbif
