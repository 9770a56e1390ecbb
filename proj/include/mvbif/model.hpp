#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mvbif/quadrature.hpp"

namespace mvbif {

using RealFn = std::function<double(double)>;

/// A function of one variable together with its analytic derivative.
struct SmoothFn {
  RealFn f;
  RealFn df;

  double operator()(double x) const { return f(x); }
  double derivative(double x) const { return df(x); }
  explicit operator bool() const { return static_cast<bool>(f); }

  static SmoothFn zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
  }
};

/// theta(alpha) > 0 on (alpha_lo, alpha_hi), with its derivative.
struct TemperatureMap {
  RealFn theta;
  RealFn theta_prime;
  double alpha_lo = 0.0;
  double alpha_hi = std::numeric_limits<double>::infinity();

  bool contains(double alpha) const { return alpha > alpha_lo && alpha < alpha_hi; }

  static TemperatureMap linear(double slope, double lo, double hi) {
    return {[slope](double a) { return slope * a; }, [slope](double) { return slope; }, lo, hi};
  }
};

/// V(x, y) = V1(x) + sum J_ij v_i(x) v_j(y) + K1(y) + sum G_ij k_i(x) k_j(y).
///
/// K1 divides out of the normalized map and is never evaluated.
struct FiniteRankKernel {
  SmoothFn V1 = SmoothFn::zero();
  std::vector<SmoothFn> v_basis;
  Eigen::MatrixXd J;
  std::vector<SmoothFn> k_basis;
  Eigen::MatrixXd G;
  RealFn K1;

  Eigen::Index l() const { return Eigen::Index(v_basis.size()); }
  Eigen::Index m() const { return Eigen::Index(k_basis.size()); }
};

/// Convolution interaction: the Gibbs exponent carries +alpha * (H * mu)(x).
struct GeneralKernel {
  SmoothFn H;
};

enum class Dimension { One, ProductForm2D };

/// Gibbs exponent: -theta(alpha) V0(x) - alpha * V(x, mu).
struct ModelSpec {
  std::string name;
  SmoothFn V0;
  std::variant<FiniteRankKernel, GeneralKernel> kernel;
  TemperatureMap temperature;
  double domain_L = 6.0;
  double beta = 1.0;
  Dimension dimension = Dimension::One;
  /// V0 and v_i even, k_i odd.
  bool symmetric = false;
  /// alpha = sigma_scale / sigma^2 for the diffusion with noise sigma dB.
  double sigma_scale = 2.0;
  /// Product-form models: variance of the Gaussian y-marginal as a function of alpha.
  RealFn y_marginal_variance;

  bool is_finite_rank() const { return std::holds_alternative<FiniteRankKernel>(kernel); }
  const FiniteRankKernel& finite_rank() const;
  const GeneralKernel& general() const;
  double alpha_for_sigma(double sigma) const { return sigma_scale / (sigma * sigma); }
  double sigma_for_alpha(double alpha) const;
};

/// Names accepted by catalog_lookup.
std::vector<std::string> catalog_names();

/// Built-in models. `beta` overrides the default interaction strength of
/// the Dawson-type models (dawson, vfp-dawson); NaN keeps the default.
ModelSpec catalog_lookup(std::string_view name,
                         double beta = std::numeric_limits<double>::quiet_NaN());

/// x^2/2 confinement with theta(alpha) = alpha and no interaction.
ModelSpec gaussian_model();

/// Structural checks: J and G exactly symmetric, matching basis sizes,
/// and linear independence of {1, v_i} and {k_i} on the grid.
void validate(const ModelSpec& model, const Quadrature& q);

}  // namespace mvbif
