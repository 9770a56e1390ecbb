#include "mvbif/gibbs.hpp"

#include <cmath>
#include <limits>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mvbif/errors.hpp"

namespace mvbif {

Eigen::VectorXd MeanField::stacked() const {
  Eigen::VectorXd r(size());
  r << r_v, r_k;
  return r;
}

MeanField MeanField::unstack(const Eigen::VectorXd& r, Eigen::Index l) {
  return {r.head(l), r.tail(r.size() - l)};
}

GridModel discretize(const ModelSpec& model, std::shared_ptr<const Quadrature> grid) {
  GridModel gm;
  gm.model = model;
  gm.grid = grid;
  const Quadrature& q = *grid;
  gm.V0 = evaluate(q, model.V0.f);
  if (model.is_finite_rank()) {
    const auto& ker = model.finite_rank();
    gm.V1 = ker.V1 ? evaluate(q, ker.V1.f) : Eigen::VectorXd::Zero(q.size());
    gm.v.resize(q.size(), ker.l());
    gm.k.resize(q.size(), ker.m());
    for (Eigen::Index j = 0; j < ker.l(); ++j) gm.v.col(j) = evaluate(q, ker.v_basis[j].f);
    for (Eigen::Index j = 0; j < ker.m(); ++j) gm.k.col(j) = evaluate(q, ker.k_basis[j].f);
  } else {
    gm.V1 = Eigen::VectorXd::Zero(q.size());
    gm.v.resize(q.size(), 0);
    gm.k.resize(q.size(), 0);
    const auto& H = model.general().H;
    gm.H.resize(q.size(), q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i)
      for (Eigen::Index j = 0; j < q.size(); ++j) gm.H(i, j) = H(q.nodes[i] - q.nodes[j]);
  }
  return gm;
}

GridModel discretize(const ModelSpec& model) {
  return discretize(model, std::make_shared<const Quadrature>(default_grid(model.domain_L)));
}

GibbsMeasure normalize_log_density(std::shared_ptr<const Quadrature> grid,
                                   const Eigen::VectorXd& log_density, double alpha, MeanField mf) {
  if (!log_density.allFinite()) {
    for (Eigen::Index i = 0; i < log_density.size(); ++i)
      if (!std::isfinite(log_density[i]))
        throw NumericError("non-finite log-density", grid->nodes[i]);
  }
  const double top = log_density.maxCoeff();
  const double floor = std::log(std::numeric_limits<double>::min());
  Eigen::VectorXd e =
      (log_density.array() - top).unaryExpr([floor](double t) { return std::exp(std::max(t, floor)); }).matrix();
  const double z = grid->weights.dot(e);
  if (!(z > 0) || !std::isfinite(z)) throw NumericError("degenerate normalizing constant");
  GibbsMeasure mu;
  mu.quadrature = std::move(grid);
  mu.density = e / z;
  mu.log_norm = top + std::log(z);
  mu.log_rho = log_density.array() - mu.log_norm;
  mu.alpha = alpha;
  mu.meanfield = std::move(mf);
  return mu;
}

namespace {

void check_alpha(const ModelSpec& model, double alpha) {
  if (!model.temperature.contains(alpha)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " outside the model's range (" << model.temperature.alpha_lo
       << ", " << model.temperature.alpha_hi << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Eigen::VectorXd gibbs_exponent(const GridModel& gm, double alpha, const MeanField& mf) {
  check_alpha(gm.model, alpha);
  const auto& ker = gm.model.finite_rank();
  const double theta = gm.model.temperature.theta(alpha);
  Eigen::VectorXd inter = gm.V1;
  if (gm.l() > 0) inter += gm.v * (ker.J * mf.r_v);
  if (gm.m() > 0) inter += gm.k * (ker.G * mf.r_k);
  return -theta * gm.V0 - alpha * inter;
}

GibbsMeasure build_gibbs(const GridModel& gm, double alpha, const MeanField& mf) {
  if (mf.r_v.size() != gm.l() || mf.r_k.size() != gm.m())
    throw std::invalid_argument("build_gibbs: mean field has the wrong dimensions");
  return normalize_log_density(gm.grid, gibbs_exponent(gm, alpha, mf), alpha, mf);
}

GibbsMeasure build_gibbs(const ModelSpec& model, double alpha, const MeanField& mf) {
  return build_gibbs(discretize(model), alpha, mf);
}

Eigen::VectorXd convolution_exponent(const GridModel& gm, double alpha, const Eigen::VectorXd& rho) {
  check_alpha(gm.model, alpha);
  const double theta = gm.model.temperature.theta(alpha);
  return -theta * gm.V0 + alpha * (gm.H * gm.weights().cwiseProduct(rho));
}

double moment(const GibbsMeasure& mu, const Eigen::VectorXd& values) {
  return mu.quadrature->weights.cwiseProduct(mu.density).dot(values);
}

double moment(const GibbsMeasure& mu, const RealFn& f) {
  return moment(mu, evaluate(*mu.quadrature, f));
}

Eigen::VectorXd pi_project(const GibbsMeasure& mu, const Eigen::VectorXd& values) {
  return values.array() - moment(mu, values);
}

Eigen::VectorXd pi_project(const GibbsMeasure& mu, const RealFn& f) {
  return pi_project(mu, evaluate(*mu.quadrature, f));
}

MeanField mean_field_of(const GridModel& gm, const GibbsMeasure& mu) {
  const Eigen::VectorXd w = mu.mass();
  return {gm.v.transpose() * w, gm.k.transpose() * w};
}

std::vector<double> stationarity_residual(const GibbsMeasure& mu, const GridModel& gm,
                                          const std::vector<TestFunction>& tests) {
  for (const auto& t : tests)
    if (!t.dg || !t.d2g) throw std::invalid_argument("stationarity_residual: test function lacks derivatives");

  const Quadrature& q = *mu.quadrature;
  const ModelSpec& model = gm.model;
  const double alpha = mu.alpha;
  const double theta = model.temperature.theta(alpha);

  // E'(x) with the interaction evaluated at mu itself
  Eigen::VectorXd dE = -theta * evaluate(q, model.V0.df);
  if (model.is_finite_rank()) {
    const auto& ker = model.finite_rank();
    const MeanField own = mean_field_of(gm, mu);
    const Eigen::VectorXd a = ker.J * own.r_v, b = ker.G * own.r_k;
    Eigen::VectorXd inter = evaluate(q, ker.V1.df);
    for (Eigen::Index i = 0; i < ker.l(); ++i) inter += a[i] * evaluate(q, ker.v_basis[i].df);
    for (Eigen::Index i = 0; i < ker.m(); ++i) inter += b[i] * evaluate(q, ker.k_basis[i].df);
    dE -= alpha * inter;
  } else {
    const auto& dH = model.general().H.df;
    const Eigen::VectorXd w = mu.mass();
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < q.size(); ++j) s += dH(q.nodes[i] - q.nodes[j]) * w[j];
      dE[i] += alpha * s;
    }
  }

  std::vector<double> out;
  out.reserve(tests.size());
  for (const auto& t : tests) {
    const Eigen::VectorXd g1 = evaluate(q, t.dg), g2 = evaluate(q, t.d2g);
    out.push_back(moment(mu, g2 + dE.cwiseProduct(g1)));
  }
  return out;
}

void write_density_csv(std::ostream& os, const GibbsMeasure& mu) {
  os << "x,density\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < mu.density.size(); ++i)
    os << mu.quadrature->nodes[i] << ',' << mu.density[i] << '\n';
}

}  // namespace mvbif
