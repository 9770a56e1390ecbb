#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace mvbif {

enum class Command { Solve, Scan, Bifurcate, AuditDawson, Simulate, Det2Scan };

struct RunConfig {
  Command command = Command::Solve;
  std::string model = "dawson";
  std::string model_file;
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> alpha;
  std::optional<double> sigma;
  std::optional<std::pair<double, double>> bracket;
  int steps = 21;
  double tol = 1e-8;
  int max_iter = 500;
  int grid_panels = 40;
  double domain_L = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  std::string output;  // empty: stdout
  std::string format = "json";
  /// solve/scan: every mean-field component starts here
  double start = 1.0;
  std::string starts;  // solve: comma list for multi-start
  // simulate
  long particles = 10000;
  double dt = 1e-3;
  double horizon = 50.0;
  double x0 = 0.0;
  long thin = 0;
};

/// Parses argv and runs the command. Exit codes: 0 success, 2 a solve did
/// not converge (results are still written), 1 any error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mvbif
