#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "mvbif/errors.hpp"

namespace mvbif {

/// Composite Gauss-Legendre rule on [-L, L]: `panels` equal subintervals
/// with an n-point Gauss-Legendre rule on each.
template <typename Scalar>
struct BasicQuadrature {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector nodes;
  Vector weights;
  Scalar half_width = 0;
  int node_count = 0;  // per panel
  int panels = 0;

  Eigen::Index size() const { return nodes.size(); }
};

using Quadrature = BasicQuadrature<double>;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
template <typename Scalar>
void gauss_legendre(int n, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) {
  using std::abs;
  using std::cos;
  x.resize(n);
  w.resize(n);
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        Scalar pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      Scalar dz = p1 / dp;
      z -= dz;
      if (abs(dz) < Scalar(4) * Eigen::NumTraits<Scalar>::epsilon()) break;
    }
    // recompute derivative at the converged root
    Scalar p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      Scalar pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = Scalar(2) / ((1 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0;
}

template <typename Scalar = double>
BasicQuadrature<Scalar> build_grid(Scalar L, int n, int panels) {
  if (!(L > 0) || n < 2 || panels < 1)
    throw std::invalid_argument("build_grid: need L > 0, n >= 2, panels >= 1");
  typename BasicQuadrature<Scalar>::Vector x, w;
  gauss_legendre<Scalar>(n, x, w);

  BasicQuadrature<Scalar> q;
  q.half_width = L;
  q.node_count = n;
  q.panels = panels;
  q.nodes.resize(Eigen::Index(n) * panels);
  q.weights.resize(Eigen::Index(n) * panels);
  const Scalar h = 2 * L / panels;
  for (int p = 0; p < panels; ++p) {
    const Scalar a = -L + h * p;
    const Scalar mid = a + h / 2;
    for (int i = 0; i < n; ++i) {
      q.nodes[p * n + i] = mid + h / 2 * x[i];
      q.weights[p * n + i] = h / 2 * w[i];
    }
  }
  return q;
}

/// Values of f at the nodes; throws NumericError at the first non-finite value.
template <typename Scalar, typename F>
typename BasicQuadrature<Scalar>::Vector evaluate(const BasicQuadrature<Scalar>& q, F&& f) {
  typename BasicQuadrature<Scalar>::Vector v(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    v[i] = f(q.nodes[i]);
    if (!std::isfinite(static_cast<double>(v[i]))) {
      std::ostringstream os;
      os << "non-finite integrand at node x = " << q.nodes[i];
      throw NumericError(os.str(), static_cast<double>(q.nodes[i]));
    }
  }
  return v;
}

/// Sum of weights times grid values. Accepts any Eigen expression.
template <typename Scalar, typename Derived>
Scalar integrate(const BasicQuadrature<Scalar>& q, const Eigen::MatrixBase<Derived>& values) {
  return q.weights.dot(values);
}

/// Sum of weights times f(nodes).
template <typename Scalar, typename F>
  requires(std::invocable<F, Scalar> &&
           !std::is_base_of_v<Eigen::DenseBase<std::remove_cvref_t<F>>, std::remove_cvref_t<F>>)
Scalar integrate(const BasicQuadrature<Scalar>& q, F&& f) {
  return q.weights.dot(evaluate(q, std::forward<F>(f)));
}

/// Default grid used throughout: 20 nodes per panel, 40 panels on [-L, L].
Quadrature default_grid(double L);

}  // namespace mvbif
