#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "witten/common.hpp"

namespace witten {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1], Newton iteration on the Legendre recurrence.
inline QuadratureRule gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

inline QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
    rule.weights[i] *= 0.5 * (b - a);
  }
  return rule;
}

template <typename F>
auto gl_integrate(const F& f, double a, double b, int n = 64) {
  const QuadratureRule rule = gauss_legendre(n, a, b);
  auto acc = f(rule.nodes[0]) * rule.weights[0];
  for (int i = 1; i < n; ++i) acc += f(rule.nodes[i]) * rule.weights[i];
  return acc;
}

namespace detail {

template <typename F, typename T>
T adaptive_simpson_rec(const F& f, double a, double b, T fa, T fm, T fb, T whole,
                       double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const T flm = f(lm), frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Works for real or complex-valued integrands.
template <typename F>
auto adaptive_simpson(const F& f, double a, double b, double tol = 1e-10,
                      int max_depth = 40) {
  using T = decltype(f(a));
  const double m = 0.5 * (a + b);
  const T fa = f(a), fm = f(m), fb = f(b);
  const T whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

inline double trapezoid(const std::vector<double>& x,
                        const std::vector<double>& y) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < x.size(); ++i)
    acc += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return acc;
}

}  // namespace witten
