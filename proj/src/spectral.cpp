#include "mvbif/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "mvbif/errors.hpp"

namespace mvbif {

Eigen::MatrixXd NystromOperator::collocation() const {
  // D^-1 A D with D = diag(sqrt(w rho)) gives alpha Kc(x_i, x_j) w_j rho_j
  return sqrt_mass.cwiseInverse().asDiagonal() * matrix * sqrt_mass.asDiagonal();
}

namespace {

// Centered stacked basis [pi v, pi k] and the matching block-diagonal
// coefficient matrix, masked by `part`.
void centered_basis(const GridModel& gm, const GibbsMeasure& mu, KernelPart part,
                    Eigen::MatrixXd& B, Eigen::MatrixXd& C) {
  const auto& ker = gm.model.finite_rank();
  const Eigen::Index l = gm.l(), m = gm.m();
  B.resize(gm.size(), l + m);
  B << gm.v, gm.k;
  const Eigen::RowVectorXd means = mu.mass().transpose() * B;
  B.rowwise() -= means;
  C = Eigen::MatrixXd::Zero(l + m, l + m);
  if (part != KernelPart::K2Only) C.topLeftCorner(l, l) = ker.J;
  if (part != KernelPart::V2Only) C.bottomRightCorner(m, m) = ker.G;
}

}  // namespace

NystromOperator nystrom_build(const GridModel& gm, const GibbsMeasure& mu, double alpha,
                              KernelPart part) {
  NystromOperator op;
  op.grid = mu.quadrature;
  op.alpha = alpha;
  const Eigen::VectorXd mass = mu.mass();
  op.sqrt_mass = mass.cwiseSqrt();
  const Eigen::Index n = gm.size();

  if (gm.model.is_finite_rank()) {
    Eigen::MatrixXd B, C;
    centered_basis(gm, mu, part, B, C);
    const Eigen::MatrixXd X = op.sqrt_mass.asDiagonal() * B;
    op.matrix = alpha * X * C * X.transpose();
  } else if (part == KernelPart::V2Only) {
    op.matrix = Eigen::MatrixXd::Zero(n, n);
  } else {
    const Eigen::MatrixXd K = -gm.H;
    const Eigen::RowVectorXd col_mean = mass.transpose() * K;  // mu(K(., y))
    const Eigen::VectorXd row_mean = K * mass;                 // mu(K(x, .))
    const double both = mass.dot(row_mean);
    Eigen::MatrixXd Kc = K;
    Kc.rowwise() -= col_mean;
    Kc.colwise() -= row_mean;
    Kc.array() += both;
    op.matrix = alpha * op.sqrt_mass.asDiagonal() * Kc * op.sqrt_mass.asDiagonal();
  }
  // Finite-rank kernels (validated J, G) and even H are symmetric: remove the
  // rounding asymmetry so the spectrum is real. An odd H gives a skew kernel,
  // which must be kept as it is.
  const double asym = (op.matrix - op.matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym <= 1e-12 * op.matrix.cwiseAbs().maxCoeff())
    op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();
  return op;
}

Eigen::MatrixXd moment_matrix(const GridModel& gm, const GibbsMeasure& mu, double alpha,
                              KernelPart part) {
  Eigen::MatrixXd B, C;
  centered_basis(gm, mu, part, B, C);
  const Eigen::MatrixXd cov = B.transpose() * mu.mass().asDiagonal() * B;
  return alpha * C * cov;
}

SpectralReport det2(const Eigen::MatrixXd& A, double alpha) {
  if (!A.allFinite()) throw NumericError("det2: non-finite operator matrix");
  SpectralReport rep;
  rep.alpha = alpha;
  const Eigen::Index n = A.rows();
  if (n == 0) return rep;
  if (A == A.transpose()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("det2: symmetric eigensolver failed");
    for (Eigen::Index i = 0; i < n; ++i) rep.eigenvalues.emplace_back(es.eigenvalues()[i], 0.0);
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw NumericError("det2: eigensolver failed");
    for (Eigen::Index i = 0; i < n; ++i) rep.eigenvalues.push_back(es.eigenvalues()[i]);
    // real matrix: non-real eigenvalues come in conjugate pairs
    for (const auto& z : rep.eigenvalues) {
      if (std::abs(z.imag()) <= 1e-10) continue;
      bool paired = false;
      for (const auto& w : rep.eigenvalues)
        if (std::abs(w - std::conj(z)) <= 1e-10) paired = true;
      if (!paired) throw NumericError("det2: unpaired complex eigenvalue");
    }
  }
  std::complex<double> prod = 1.0;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& k : rep.eigenvalues) {
    prod *= (1.0 + k) * std::exp(-k);
    margin = std::min(margin, std::abs(1.0 + k));
  }
  if (std::abs(prod.imag()) > 1e-10 * std::max(1.0, std::abs(prod.real())))
    throw NumericError("det2: imaginary residue after pairing");
  rep.det2 = prod.real();
  rep.sign = std::abs(rep.det2) < 1e-12 ? 0 : (rep.det2 > 0 ? 1 : -1);
  rep.min_abs_one_plus_kappa = n ? margin : 1.0;
  return rep;
}

SpectralReport det2(const NystromOperator& op) { return det2(op.matrix, op.alpha); }

CrossingScan crossing_scan(const GridModel& gm, double lo, double hi, int steps,
                           const SolverOptions& opt) {
  if (!(lo < hi) || steps < 2) throw std::invalid_argument("crossing_scan: need lo < hi and steps >= 2");
  if (!gm.model.is_finite_rank())
    throw std::invalid_argument("crossing_scan: finite-rank kernels only");
  CrossingScan scan;
  Eigen::VectorXd warm;
  double last_alpha = 0.0;
  int last_sign = 0;
  for (int i = 0; i < steps; ++i) {
    ScanSample s;
    s.alpha = lo + (hi - lo) * i / (steps - 1);
    try {
      FixedPointResult br = solve_trivial_branch(gm, s.alpha, warm, opt);
      if (br.converged) {
        warm = br.meanfield.r_v;
        s.report = det2(nystrom_build(gm, br.measure, s.alpha));
        s.valid = true;
      }
    } catch (const std::exception&) {
      s.valid = false;
    }
    if (s.valid && s.report.sign != 0) {
      if (last_sign != 0 && s.report.sign != last_sign) scan.brackets.emplace_back(last_alpha, s.alpha);
      last_sign = s.report.sign;
      last_alpha = s.alpha;
    }
    scan.samples.push_back(std::move(s));
  }
  return scan;
}

void write_scan_csv(std::ostream& os, const CrossingScan& scan) {
  os << "alpha,det2,sign,min_abs_one_plus_kappa\n" << std::setprecision(17);
  for (const auto& s : scan.samples) {
    os << s.alpha << ',';
    if (s.valid)
      os << s.report.det2 << ',' << s.report.sign << ',' << s.report.min_abs_one_plus_kappa << '\n';
    else
      os << "nan,nan,nan\n";
  }
}

InvertibilityCheck invertibility_check(const GridModel& gm, const GibbsMeasure& trivial) {
  SpectralReport rep = det2(nystrom_build(gm, trivial, trivial.alpha, KernelPart::V2Only));
  return {rep.min_abs_one_plus_kappa > 1e-6, rep.min_abs_one_plus_kappa};
}

InvertibilityCheck invertibility_check(const GridModel& gm, double alpha, const SolverOptions& opt) {
  GibbsMeasure mu;
  if (gm.model.is_finite_rank()) {
    FixedPointResult br = solve_trivial_branch(gm, alpha, {}, opt);
    mu = br.measure;
  } else {
    // every part of a convolution kernel counts as K2
    mu = normalize_log_density(gm.grid, -gm.model.temperature.theta(alpha) * gm.V0, alpha);
  }
  return invertibility_check(gm, mu);
}

}  // namespace mvbif
