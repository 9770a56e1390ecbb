#pragma once

// Test-side reference computations. Nothing here calls into the library's
// quadrature, solvers or root finders.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

/// Composite Simpson on [-L, L] with 2*half_intervals subintervals.
struct Simpson {
  std::vector<double> x, w;

  Simpson(double L, int half_intervals) {
    const int n = 2 * half_intervals;
    const double h = 2 * L / n;
    x.resize(n + 1);
    w.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      x[i] = -L + h * i;
      w[i] = h / 3 * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    }
  }

  double integrate(const Fn& f) const {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
    return s;
  }
};

/// Expectation under the density proportional to exp(logd(x)), stabilized by
/// the log-density at the origin's neighbourhood maximum over the nodes.
struct GibbsOracle {
  Simpson q;
  std::vector<double> p;  // normalized weights w_i rho_i

  GibbsOracle(double L, int half_intervals, const Fn& logd) : q(L, half_intervals) {
    std::vector<double> l(q.x.size());
    double top = -INFINITY;
    for (std::size_t i = 0; i < l.size(); ++i) {
      l[i] = logd(q.x[i]);
      top = std::max(top, l[i]);
    }
    double z = 0;
    p.resize(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
      p[i] = q.w[i] * std::exp(l[i] - top);
      z += p[i];
    }
    for (double& v : p) v /= z;
  }

  double expect(const Fn& f) const {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * f(q.x[i]);
    return s;
  }
};

/// Plain bisection; requires a sign change.
inline double bisect(const Fn& f, double a, double b, double width) {
  double fa = f(a), fb = f(b);
  if ((fa > 0) == (fb > 0)) throw std::runtime_error("oracle::bisect: no sign change");
  while (b - a > width) {
    const double c = 0.5 * (a + b), fc = f(c);
    if ((fc > 0) == (fa > 0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
      fb = fc;
    }
  }
  return 0.5 * (a + b);
}

/// Dawson model written out by hand, alpha = 2 beta / sigma^2:
/// density of x proportional to exp(-(alpha/beta)(x^4/4 - x^2/2) - alpha(x^2/2 - m x)).
struct Dawson {
  double beta = 1.0;
  double L = 6.0;
  int half_intervals = 6000;

  double alpha(double sigma) const { return 2 * beta / (sigma * sigma); }

  GibbsOracle measure(double alpha, double m) const {
    const double b = beta;
    return GibbsOracle(L, half_intervals, [=](double x) {
      return -(alpha / b) * (x * x * x * x / 4 - x * x / 2) - alpha * (x * x / 2 - m * x);
    });
  }

  /// Scalar self-consistency map m -> mu_m(x).
  double map(double alpha, double m) const {
    return measure(alpha, m).expect([](double x) { return x; });
  }

  double m2(double alpha) const { return measure(alpha, 0).expect([](double x) { return x * x; }); }

  /// Number of roots of F(m) - m on [-2, 2], by sign changes on a fine m grid
  /// (m = 0 counted separately since it is an exact root by symmetry).
  int root_count(double alpha, int samples = 400) const {
    int count = 1;  // m = 0
    double prev_m = 1e-3, prev = map(alpha, prev_m) - prev_m;
    for (int i = 1; i <= samples; ++i) {
      const double m = 1e-3 + 2.0 * i / samples;
      const double g = map(alpha, m) - m;
      if ((g > 0) != (prev > 0)) count += 2;  // the mirrored root at -m as well
      prev = g;
      prev_m = m;
    }
    return count;
  }
};

}  // namespace oracle
