#include "mvbif/particles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mvbif/errors.hpp"

namespace mvbif {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0, 1)
inline double uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return (double(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Block Philox4x32::operator()(Block c) const {
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kW0;
    k1 += kW1;
  }
  return c;
}

std::pair<double, double> Philox4x32::normals(const Block& ctr) const {
  const Block b = (*this)(ctr);
  const double u1 = uniform(b[0], b[1]), u2 = uniform(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

namespace {

// Fills z[0..N) with normals for (step, stream).
void draw_normals(const Philox4x32& rng, std::uint64_t step, std::uint32_t stream,
                  std::vector<double>& z) {
  const std::size_t n = z.size();
  for (std::size_t i = 0; 2 * i < n; ++i) {
    auto [a, b] = rng.normals({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
                               static_cast<std::uint32_t>(step),
                               static_cast<std::uint32_t>(step >> 32) ^ (stream << 24)});
    z[2 * i] = a;
    if (2 * i + 1 < n) z[2 * i + 1] = b;
  }
}

struct Drift {
  const ModelSpec& model;
  double scale;  // sigma^2 / 2
  double theta;
  double alpha;

  double single(double x) const {
    double d = -theta * model.V0.df(x);
    if (model.is_finite_rank()) d -= alpha * model.finite_rank().V1.df(x);
    return scale * d;
  }
};

}  // namespace

SimReport simulate(const SimConfig& cfg) {
  const ModelSpec& model = cfg.model;
  if (cfg.N < 1 || !(cfg.dt > 0) || !(cfg.T > 0) || !(cfg.sigma > 0))
    throw std::invalid_argument("simulate: need N >= 1, dt > 0, T > 0, sigma > 0");
  if (!(cfg.burn_in >= 0 && cfg.burn_in < 1))
    throw std::invalid_argument("simulate: burn_in must be in [0, 1)");
  if (cfg.batches < 2 || cfg.max_order < 1 || cfg.histogram_bins < 1)
    throw std::invalid_argument("simulate: need batches >= 2, max_order >= 1, bins >= 1");
  if (!std::isnan(cfg.beta) && cfg.beta != model.beta)
    throw std::invalid_argument("simulate: beta differs from the model's beta");
  if (!model.V0.df) throw std::invalid_argument("simulate: model lacks grad V0");

  const double alpha = model.alpha_for_sigma(cfg.sigma);
  Drift drift{model, 0.5 * cfg.sigma * cfg.sigma, model.temperature.theta(alpha), alpha};
  const double L = model.domain_L;

  // stability guard from the confining part of the drift
  {
    double stiff = 0.0;
    const int M = 400;
    const double h = 1e-5 * L;
    for (int i = 0; i <= M; ++i) {
      const double x = -L + 2 * L * i / M;
      stiff = std::max(stiff, std::abs(drift.single(x + h) - drift.single(x - h)) / (2 * h));
    }
    if (cfg.dt * stiff >= 0.5) {
      std::ostringstream os;
      os << "simulate: dt * stiffness = " << cfg.dt * stiff << " >= 0.5; reduce dt";
      throw std::invalid_argument(os.str());
    }
  }

  const long steps = std::lround(cfg.T / cfg.dt);
  const long burn = std::lround(cfg.burn_in * steps);
  const long kept = steps - burn;
  if (kept < cfg.batches) throw std::invalid_argument("simulate: fewer post-burn-in steps than batches");

  const Philox4x32 rng(cfg.seed);
  const std::size_t N = static_cast<std::size_t>(cfg.N);
  std::vector<double> X(N), z(N), grad(N);
  draw_normals(rng, 0, 1, z);
  for (std::size_t i = 0; i < N; ++i) X[i] = cfg.x0 + cfg.init_spread * z[i];

  const bool finite = model.is_finite_rank();
  const FiniteRankKernel* ker = finite ? &model.finite_rank() : nullptr;
  const Eigen::Index l = finite ? ker->l() : 0, m = finite ? ker->m() : 0;
  Eigen::VectorXd rv(l), rk(m);

  const int P = cfg.max_order;
  std::vector<double> batch_sum(std::size_t(cfg.batches) * P, 0.0);
  std::vector<long> batch_count(cfg.batches, 0);

  SimReport rep;
  rep.seed = cfg.seed;
  rep.alpha = alpha;
  rep.beta = model.beta;
  rep.steps = steps;
  rep.burn_steps = burn;

  const double sdt = cfg.sigma * std::sqrt(cfg.dt);
  const double bound = 10.0 * L;
  const double invN = 1.0 / double(N);
  for (long s = 0; s < steps; ++s) {
    // empirical mean field
    if (finite) {
      rv.setZero();
      rk.setZero();
      for (std::size_t i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < l; ++j) rv[j] += ker->v_basis[j](X[i]);
        for (Eigen::Index j = 0; j < m; ++j) rk[j] += ker->k_basis[j](X[i]);
      }
      rv *= invN;
      rk *= invN;
      const Eigen::VectorXd a = ker->J * rv, b = ker->G * rk;
      for (std::size_t i = 0; i < N; ++i) {
        const double x = X[i];
        double d = -drift.theta * model.V0.df(x) - alpha * ker->V1.df(x);
        double e = 0.0;
        for (Eigen::Index j = 0; j < l; ++j) e += a[j] * ker->v_basis[j].df(x);
        for (Eigen::Index j = 0; j < m; ++j) e += b[j] * ker->k_basis[j].df(x);
        grad[i] = drift.scale * (d - alpha * e);
      }
    } else {
      // O(N^2) convolution with H'
      const auto& dH = model.general().H.df;
      for (std::size_t i = 0; i < N; ++i) {
        double c = 0.0;
        for (std::size_t j = 0; j < N; ++j) c += dH(X[i] - X[j]);
        grad[i] = drift.scale * (-drift.theta * model.V0.df(X[i]) + alpha * c * invN);
      }
    }
    draw_normals(rng, std::uint64_t(s), 0, z);
    for (std::size_t i = 0; i < N; ++i) {
      X[i] += grad[i] * cfg.dt + sdt * z[i];
      if (!(std::abs(X[i]) <= bound)) {
        std::ostringstream os;
        os << "particle " << i << " left [-" << bound << ", " << bound << "] at step " << s + 1
           << " (dt = " << cfg.dt << ")";
        throw BlowUpError(os.str(), cfg.dt);
      }
    }

    const bool record = cfg.thin > 0 && (s + 1) % cfg.thin == 0;
    if (s >= burn || record) {
      std::vector<double> mom(P, 0.0);
      for (std::size_t i = 0; i < N; ++i) {
        double p = 1.0;
        for (int k = 0; k < P; ++k) {
          p *= X[i];
          mom[k] += p;
        }
      }
      for (auto& v : mom) v *= invN;
      if (s >= burn) {
        const long b = std::min<long>((s - burn) * cfg.batches / kept, cfg.batches - 1);
        for (int k = 0; k < P; ++k) batch_sum[b * P + k] += mom[k];
        ++batch_count[b];
      }
      if (record) {
        TrajectoryRow row;
        row.t = (s + 1) * cfg.dt;
        row.mean = mom[0];
        row.m2 = P >= 2 ? mom[1] : 0.0;
        row.x.assign(X.begin(), X.begin() + std::min<std::size_t>(N, 4));
        rep.trajectory.push_back(std::move(row));
      }
    }
  }

  const int B = cfg.batches;
  for (int k = 0; k < P; ++k) {
    double mean = 0.0, sq = 0.0;
    for (int b = 0; b < B; ++b) {
      const double v = batch_sum[b * P + k] / batch_count[b];
      mean += v;
      sq += v * v;
    }
    mean /= B;
    const double var = std::max(0.0, (sq - B * mean * mean) / (B - 1));
    rep.moments[k + 1] = {mean, std::sqrt(var / B)};
  }

  rep.histogram_lo = -L;
  rep.histogram_hi = L;
  rep.histogram.assign(cfg.histogram_bins, 0);
  for (double x : X) {
    if (x < -L || x >= L) continue;
    const int b = std::min(cfg.histogram_bins - 1, int((x + L) / (2 * L) * cfg.histogram_bins));
    ++rep.histogram[b];
  }
  auto [lo, hi] = std::minmax_element(X.begin(), X.end());
  rep.final_positions_summary = {*lo, *hi};
  return rep;
}

void write_trajectory_csv(std::ostream& os, const SimReport& rep) {
  os << "t,mean,m2";
  const std::size_t k = rep.trajectory.empty() ? 0 : rep.trajectory.front().x.size();
  for (std::size_t i = 0; i < k; ++i) os << ",x" << i;
  os << '\n' << std::setprecision(17);
  for (const auto& r : rep.trajectory) {
    os << r.t << ',' << r.mean << ',' << r.m2;
    for (double x : r.x) os << ',' << x;
    os << '\n';
  }
}

}  // namespace mvbif
