#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "mvbif/model.hpp"

namespace mvbif {

/// Philox4x32-10 (Salmon et al., SC'11). Stateless: every output block is
/// a pure function of (counter, key), so streams do not depend on call order.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(Block ctr) const;

  /// Two independent standard normals for counter ctr: two 53-bit uniforms
  /// in (0, 1) from the four output words, then Box-Muller.
  std::pair<double, double> normals(const Block& ctr) const;

 private:
  std::array<std::uint32_t, 2> key_;
};

struct SimConfig {
  long N = 10000;
  double dt = 1e-3;
  double T = 50.0;
  /// Fraction of the horizon discarded before time averaging.
  double burn_in = 0.2;
  std::uint64_t seed = 0;
  ModelSpec model;
  double sigma = 2.0;
  /// Must equal model.beta when given; NaN takes the model's value.
  double beta = std::numeric_limits<double>::quiet_NaN();
  /// Initial positions x0 + init_spread * N(0, 1).
  double x0 = 0.0;
  double init_spread = 0.0;
  int batches = 20;
  int max_order = 4;
  int histogram_bins = 64;
  /// Record a trajectory row every `thin` steps; 0 disables.
  long thin = 0;
};

struct TrajectoryRow {
  double t = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  std::vector<double> x;  // first few particles
};

struct SimReport {
  /// order -> (time-averaged empirical moment, batch-means standard error)
  std::map<int, std::pair<double, double>> moments;
  std::vector<long> histogram;
  double histogram_lo = 0.0;
  double histogram_hi = 0.0;
  std::vector<double> final_positions_summary;  // min, max
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double beta = 0.0;
  long steps = 0;
  long burn_steps = 0;
  std::vector<TrajectoryRow> trajectory;
};

/// Euler-Maruyama for dX = (sigma^2 / 2) E'(X; empirical law) dt + sigma dB,
/// where E is the Gibbs exponent at alpha = sigma_scale / sigma^2; its
/// stationary law is the Gibbs measure of the model. Throws BlowUpError
/// when a particle leaves [-10 L, 10 L].
SimReport simulate(const SimConfig& cfg);

/// Columns t, mean, m2, x0, x1, ...
void write_trajectory_csv(std::ostream& os, const SimReport& rep);

}  // namespace mvbif
