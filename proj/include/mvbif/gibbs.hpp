#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <vector>

#include "mvbif/model.hpp"
#include "mvbif/quadrature.hpp"

namespace mvbif {

/// r_v = mu(v_j), r_k = mu(k_j).
struct MeanField {
  Eigen::VectorXd r_v;
  Eigen::VectorXd r_k;

  static MeanField zeros(Eigen::Index l, Eigen::Index m) {
    return {Eigen::VectorXd::Zero(l), Eigen::VectorXd::Zero(m)};
  }
  Eigen::Index size() const { return r_v.size() + r_k.size(); }
  Eigen::VectorXd stacked() const;
  static MeanField unstack(const Eigen::VectorXd& r, Eigen::Index l);
};

/// A model tabulated on a fixed quadrature grid. Every measure, kernel and
/// operator built from it shares these nodes.
struct GridModel {
  ModelSpec model;
  std::shared_ptr<const Quadrature> grid;
  Eigen::VectorXd V0;
  Eigen::VectorXd V1;
  Eigen::MatrixXd v;  // n x l
  Eigen::MatrixXd k;  // n x m
  Eigen::MatrixXd H;  // n x n, H(x_i - x_j); convolution models only

  Eigen::Index l() const { return v.cols(); }
  Eigen::Index m() const { return k.cols(); }
  Eigen::Index size() const { return grid->size(); }
  const Eigen::VectorXd& nodes() const { return grid->nodes; }
  const Eigen::VectorXd& weights() const { return grid->weights; }
};

GridModel discretize(const ModelSpec& model, std::shared_ptr<const Quadrature> grid);
/// Default grid on [-model.domain_L, model.domain_L].
GridModel discretize(const ModelSpec& model);

/// Normalized density on the grid nodes.
struct GibbsMeasure {
  std::shared_ptr<const Quadrature> quadrature;
  Eigen::VectorXd density;
  /// Exact log-density; `density` is floored at DBL_MIN where this is lower.
  Eigen::VectorXd log_rho;
  /// log of the normalizing constant of the unnormalized density.
  double log_norm = 0.0;
  double alpha = 0.0;
  MeanField meanfield;

  /// weights .* density; moment(f) == mass().dot(f(nodes)).
  Eigen::VectorXd mass() const { return quadrature->weights.cwiseProduct(density); }
  const Eigen::VectorXd& log_density() const { return log_rho; }
};

/// Normalizes exp(log_density) on the grid with log-sum-exp stabilization.
/// Nodes more than ~708 below the maximum are floored at DBL_MIN so that the
/// density stays positive; their mass is below 1e-300.
GibbsMeasure normalize_log_density(std::shared_ptr<const Quadrature> grid,
                                   const Eigen::VectorXd& log_density, double alpha,
                                   MeanField mf = {});

/// Unnormalized log-density -theta V0 - alpha [V1 + v J r_v + k G r_k].
Eigen::VectorXd gibbs_exponent(const GridModel& gm, double alpha, const MeanField& mf);

GibbsMeasure build_gibbs(const GridModel& gm, double alpha, const MeanField& mf);
GibbsMeasure build_gibbs(const ModelSpec& model, double alpha, const MeanField& mf);

/// Convolution models: exponent -theta V0 + alpha (H * rho).
Eigen::VectorXd convolution_exponent(const GridModel& gm, double alpha, const Eigen::VectorXd& rho);

double moment(const GibbsMeasure& mu, const Eigen::VectorXd& values);
double moment(const GibbsMeasure& mu, const RealFn& f);

/// f - mu(f) on the grid.
Eigen::VectorXd pi_project(const GibbsMeasure& mu, const Eigen::VectorXd& values);
Eigen::VectorXd pi_project(const GibbsMeasure& mu, const RealFn& f);

/// Mean field of mu for the model's bases.
MeanField mean_field_of(const GridModel& gm, const GibbsMeasure& mu);

struct TestFunction {
  RealFn g;
  RealFn dg;
  RealFn d2g;
};

/// mu(g'' + E' g') for each g, where E is the Gibbs exponent with the mean
/// field recomputed from mu itself. Zero (up to truncation) exactly when
/// mu is stationary for the self-consistent generator.
std::vector<double> stationarity_residual(const GibbsMeasure& mu, const GridModel& gm,
                                          const std::vector<TestFunction>& tests);

/// Columns x, density.
void write_density_csv(std::ostream& os, const GibbsMeasure& mu);

}  // namespace mvbif
