#include "mvbif/model.hpp"

#include <cmath>
#include <sstream>

#include "mvbif/errors.hpp"

namespace mvbif {

const FiniteRankKernel& ModelSpec::finite_rank() const {
  if (auto* k = std::get_if<FiniteRankKernel>(&kernel)) return *k;
  throw std::invalid_argument("model '" + name + "' has a convolution kernel, not a finite-rank one");
}

const GeneralKernel& ModelSpec::general() const {
  if (auto* k = std::get_if<GeneralKernel>(&kernel)) return *k;
  throw std::invalid_argument("model '" + name + "' has a finite-rank kernel, not a convolution one");
}

double ModelSpec::sigma_for_alpha(double alpha) const { return std::sqrt(sigma_scale / alpha); }

namespace {

SmoothFn identity() {
  return {[](double x) { return x; }, [](double) { return 1.0; }};
}

SmoothFn square_half() {
  return {[](double x) { return 0.5 * x * x; }, [](double x) { return x; }};
}

SmoothFn double_well() {
  return {[](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; },
          [](double x) { return x * x * x - x; }};
}

Eigen::MatrixXd scalar(double g) { return Eigen::MatrixXd::Constant(1, 1, g); }

// Dawson's Curie-Weiss model with alpha = 2 beta / sigma^2.
ModelSpec dawson(double beta) {
  ModelSpec m;
  m.name = "dawson";
  m.V0 = double_well();
  FiniteRankKernel k;
  k.V1 = square_half();
  k.k_basis = {identity()};
  k.G = scalar(-1.0);
  k.K1 = [](double y) { return y * y; };
  m.kernel = std::move(k);
  m.temperature = TemperatureMap::linear(1.0 / beta, 1e-3, 1e3);
  m.domain_L = 6.0;
  m.beta = beta;
  m.symmetric = true;
  m.sigma_scale = 2.0 * beta;
  return m;
}

// Kinetic Dawson model: alpha = beta / sigma^2, theta = 2 alpha / beta; the
// stationary law is N(0, sigma^2/2) in y times the x-problem below.
ModelSpec vfp_dawson(double beta) {
  ModelSpec m;
  m.name = "vfp-dawson";
  m.V0 = double_well();
  FiniteRankKernel k;
  k.V1 = {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }};
  k.k_basis = {identity()};
  k.G = scalar(-2.0);
  k.K1 = [](double y) { return y * y; };
  m.kernel = std::move(k);
  m.temperature = TemperatureMap::linear(2.0 / beta, 1e-3, 1e3);
  m.domain_L = 6.0;
  m.beta = beta;
  m.dimension = Dimension::ProductForm2D;
  m.symmetric = true;
  m.sigma_scale = beta;
  m.y_marginal_variance = [beta](double alpha) { return beta / (2.0 * alpha); };
  return m;
}

// x^4/4 + x^2/2 - sin^2 x with K2 = -2xy + 2 sin x sin y, alpha = 2 / sigma^2.
ModelSpec xsin() {
  ModelSpec m;
  m.name = "xsin";
  m.V0 = {[](double x) {
            double s = std::sin(x);
            return 0.25 * x * x * x * x + 0.5 * x * x - s * s;
          },
          [](double x) { return x * x * x + x - std::sin(2.0 * x); }};
  FiniteRankKernel k;
  k.k_basis = {identity(), {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }}};
  k.G = Eigen::Vector2d(-2.0, 2.0).asDiagonal();
  k.K1 = [](double y) {
    double s = std::sin(y);
    return y * y - s * s;
  };
  m.kernel = std::move(k);
  m.temperature = TemperatureMap::linear(1.0, 1e-3, 1e3);
  m.domain_L = 6.0;
  m.beta = 2.0;
  m.symmetric = true;
  m.sigma_scale = 2.0;
  return m;
}

// Granular-media type model in d = 1: V0 = x^4 - x^2 sin|x|,
// H(z) = (1 + z^2) sin z, theta(alpha) = alpha.
ModelSpec granular_sin() {
  ModelSpec m;
  m.name = "granular-sin";
  m.V0 = {[](double x) { return x * x * x * x - x * x * std::sin(std::abs(x)); },
          [](double x) {
            double a = std::abs(x);
            return 4.0 * x * x * x - 2.0 * x * std::sin(a) - x * a * std::cos(a);
          }};
  GeneralKernel k;
  k.H = {[](double z) { return (1.0 + z * z) * std::sin(z); },
         [](double z) { return 2.0 * z * std::sin(z) + (1.0 + z * z) * std::cos(z); }};
  m.kernel = std::move(k);
  m.temperature = TemperatureMap::linear(1.0, 1e-3, 1e3);
  m.domain_L = 8.0;
  m.beta = 1.0;
  m.symmetric = false;
  m.sigma_scale = 2.0;
  return m;
}

// C1 = C2 = 1, gamma_3 = 1/2: interaction sgn(x)|x|^(1/2) * mu(theta) with the
// continuous choice theta(y) = sgn(y)|y|^(1/2), i.e. k_1 = sgn(x)|x|^(1/2), G = [-1].
ModelSpec singular_theta() {
  ModelSpec m;
  m.name = "singular-theta";
  m.V0 = double_well();
  FiniteRankKernel k;
  k.k_basis = {{[](double x) { return std::copysign(std::sqrt(std::abs(x)), x); },
                [](double x) {
                  double a = std::abs(x);
                  return a > 0 ? 0.5 / std::sqrt(a) : std::numeric_limits<double>::infinity();
                }}};
  k.G = scalar(-1.0);
  m.kernel = std::move(k);
  m.temperature = TemperatureMap::linear(1.0, 1e-3, 1e3);
  m.domain_L = 6.0;
  m.beta = 1.0;
  m.symmetric = true;
  m.sigma_scale = 2.0;
  return m;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"dawson", "xsin", "granular-sin", "vfp-dawson", "singular-theta"};
}

ModelSpec catalog_lookup(std::string_view name, double beta) {
  const bool keep = std::isnan(beta);
  if (!keep && !(beta > 0)) throw std::invalid_argument("catalog_lookup: beta must be > 0");
  if (name == "dawson") return dawson(keep ? 1.0 : beta);
  if (name == "vfp-dawson") return vfp_dawson(keep ? 1.0 : beta);
  if (name == "xsin") return xsin();
  if (name == "granular-sin") return granular_sin();
  if (name == "singular-theta") return singular_theta();
  throw LookupError("unknown catalog model '" + std::string(name) + "'");
}

ModelSpec gaussian_model() {
  ModelSpec m;
  m.name = "gaussian";
  m.V0 = square_half();
  m.kernel = FiniteRankKernel{};
  m.temperature = TemperatureMap::linear(1.0, 1e-3, 1e3);
  m.domain_L = 12.0;
  m.symmetric = true;
  return m;
}

namespace {

void check_symmetric(const Eigen::MatrixXd& M, Eigen::Index n, const char* label) {
  if (M.rows() != n || M.cols() != n) {
    std::ostringstream os;
    os << label << " must be " << n << "x" << n << ", got " << M.rows() << "x" << M.cols();
    throw ValidationError(os.str());
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (M(i, j) != M(j, i)) {
        std::ostringstream os;
        os << label << " is not symmetric: entry (" << i << "," << j << ") = " << M(i, j)
           << " but (" << j << "," << i << ") = " << M(j, i);
        throw ValidationError(os.str());
      }
}

// Smallest-to-largest singular value ratio of the weighted basis matrix.
double gram_conditioning(const Eigen::MatrixXd& B, const Eigen::VectorXd& sqrt_w) {
  if (B.cols() == 0) return 1.0;
  Eigen::MatrixXd W = sqrt_w.asDiagonal() * B;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

}  // namespace

void validate(const ModelSpec& model, const Quadrature& q) {
  if (!model.V0) throw ValidationError("model '" + model.name + "': V0 missing");
  if (!(model.domain_L > 0)) throw ValidationError("model '" + model.name + "': domain_L must be > 0");
  if (!model.is_finite_rank()) {
    if (!model.general().H) throw ValidationError("model '" + model.name + "': H missing");
    return;
  }
  const auto& k = model.finite_rank();
  check_symmetric(k.J, k.l(), "J");
  check_symmetric(k.G, k.m(), "G");

  const Eigen::VectorXd sqrt_w = q.weights.cwiseSqrt();
  Eigen::MatrixXd Bv(q.size(), k.l() + 1), Bk(q.size(), k.m());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double x = q.nodes[i];
    Bv(i, 0) = 1.0;
    for (Eigen::Index a = 0; a < k.l(); ++a) Bv(i, a + 1) = k.v_basis[a](x);
    for (Eigen::Index a = 0; a < k.m(); ++a) Bk(i, a) = k.k_basis[a](x);
  }
  if (!Bv.allFinite() || !Bk.allFinite())
    throw ValidationError("model '" + model.name + "': basis function not finite on the grid");
  constexpr double kRankTol = 1e-10;
  if (gram_conditioning(Bv, sqrt_w) < kRankTol)
    throw ValidationError("model '" + model.name + "': {1} and v_basis are linearly dependent");
  if (gram_conditioning(Bk, sqrt_w) < kRankTol)
    throw ValidationError("model '" + model.name + "': k_basis is linearly dependent");
}

}  // namespace mvbif
