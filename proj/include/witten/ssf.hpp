#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "witten/determinant.hpp"
#include "witten/quadrature.hpp"

namespace witten {

enum class Normalization { Counting, ZeroBelowSpectrum, Cayley, Unnormalized };

inline const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::Counting: return "counting";
    case Normalization::ZeroBelowSpectrum: return "zero-below-spectrum";
    case Normalization::Cayley: return "cayley";
    case Normalization::Unnormalized: return "unnormalized";
  }
  return "unknown";
}

// Sampled spectral shift function. Counting curves additionally carry their
// exact step representation (knots + levels, levels.size() == knots.size()+1)
// so downstream integrals can be evaluated without quadrature error.
struct SSFCurve {
  std::vector<double> grid;    // strictly increasing
  std::vector<double> values;  // samples on grid
  Normalization normalization = Normalization::Unnormalized;

  std::vector<double> knots;   // step representation, optional
  std::vector<double> levels;  // level k holds on (knots[k-1], knots[k])

  bool has_steps() const { return !knots.empty(); }

  // Right-continuous on step curves, linear interpolation otherwise
  // (endpoint values extended as constants).
  double eval(double x) const {
    if (has_steps()) {
      // counting convention #{<= x}: at a knot the post-jump level holds
      const auto it = std::upper_bound(knots.begin(), knots.end(), x);
      return levels[static_cast<size_t>(it - knots.begin())];
    }
    if (grid.empty()) return 0.0;
    if (x <= grid.front()) return values.front();
    if (x >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const size_t j = static_cast<size_t>(it - grid.begin());
    const double t = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return (1.0 - t) * values[j - 1] + t * values[j];
  }

  // Exact integral over the real line; finite only when the outer levels
  // vanish (always true for counting curves of finite pairs).
  double step_integral() const {
    if (!has_steps()) throw ValidationError("step_integral: no step data");
    double acc = 0.0;
    for (size_t k = 0; k + 1 < knots.size(); ++k)
      acc += levels[k + 1] * (knots[k + 1] - knots[k]);
    return acc;
  }
};

inline SSFCurve resample(const SSFCurve& c, const std::vector<double>& grid) {
  SSFCurve out;
  out.grid = grid;
  out.values.reserve(grid.size());
  for (double x : grid) out.values.push_back(c.eval(x));
  out.normalization = c.normalization;
  return out;
}

// ---------------------------------------------------------------------------
// Counting route: xi(lambda) = #{eig(A0) <= lambda} - #{eig(A) <= lambda}.
// ---------------------------------------------------------------------------

inline SSFCurve ssf_counting(const OperatorPair& pair,
                             const std::vector<double>& grid) {
  const auto sd0 = eig(pair.base);
  const auto sd1 = eig(pair.perturbed);
  std::vector<std::pair<double, int>> events;
  events.reserve(2 * static_cast<size_t>(pair.dim()));
  for (Eigen::Index k = 0; k < sd0.eigenvalues.size(); ++k)
    events.emplace_back(sd0.eigenvalues[k], +1);
  for (Eigen::Index k = 0; k < sd1.eigenvalues.size(); ++k)
    events.emplace_back(sd1.eigenvalues[k], -1);
  std::sort(events.begin(), events.end());

  SSFCurve curve;
  curve.normalization = Normalization::Counting;
  curve.knots.reserve(events.size());
  curve.levels.reserve(events.size() + 1);
  double level = 0.0;
  curve.levels.push_back(level);
  for (size_t k = 0; k < events.size(); ++k) {
    level += events[k].second;
    if (k + 1 < events.size() && events[k + 1].first == events[k].first) continue;
    curve.knots.push_back(events[k].first);
    curve.levels.push_back(level);
  }
  curve.grid = grid;
  curve.values.reserve(grid.size());
  for (double x : grid) curve.values.push_back(curve.eval(x));
  return curve;
}

// ---------------------------------------------------------------------------
// Branch-tracked boundary-value routes.
// ---------------------------------------------------------------------------

namespace detail {

// Continues the phase of `evaluator` from (p0, value d0) to p1, bisecting
// until each wrapped argument increment is < 0.9 pi.
template <typename F>
void walk_phase(const F& evaluator, double p0, Complex d0, double& phase,
                double p1, Complex& d1, int depth = 48) {
  d1 = evaluator(p1);
  if (std::abs(d1) == 0.0)
    throw NumericalError("phase walk: determinant vanishes at " +
                         std::to_string(p1));
  const double step = std::arg(d1 / d0);
  if (std::abs(step) < 0.9 * kPi) {
    phase += step;
    return;
  }
  if (depth <= 0)
    throw NumericalError("phase walk: cannot resolve winding near " +
                         std::to_string(p1));
  const double mid = 0.5 * (p0 + p1);
  Complex dm;
  walk_phase(evaluator, p0, d0, phase, mid, dm, depth - 1);
  walk_phase(evaluator, mid, dm, phase, p1, d1, depth - 1);
}

// Runs a phase walk through anchor + grid and returns phases at grid points.
template <typename F>
std::vector<double> anchored_phases(const F& evaluator, double anchor,
                                    const std::vector<double>& grid) {
  std::vector<double> phases;
  phases.reserve(grid.size());
  Complex d = evaluator(anchor);
  if (std::abs(d) == 0.0)
    throw NumericalError("phase walk: determinant vanishes at the anchor");
  double phase = std::arg(d);
  double p = anchor;
  for (double x : grid) {
    Complex dn;
    walk_phase(evaluator, p, d, phase, x, dn);
    p = x;
    d = dn;
    phases.push_back(phase);
  }
  return phases;
}

inline double joint_spectral_min(const OperatorPair& pair) {
  return std::min(eig(pair.base).eigenvalues[0],
                  eig(pair.perturbed).eigenvalues[0]);
}

inline double joint_spectral_diameter(const OperatorPair& pair) {
  const auto s0 = eig(pair.base).eigenvalues;
  const auto s1 = eig(pair.perturbed).eigenvalues;
  const double lo = std::min(s0[0], s1[0]);
  const double hi = std::max(s0[s0.size() - 1], s1[s1.size() - 1]);
  return hi - lo;
}

}  // namespace detail

// xi(lambda) = pi^{-1} Im ln D_{A/A0}(lambda + i eps), branch anchored below
// the joint spectrum so the curve vanishes there.
inline SSFCurve ssf_via_det_phase(const OperatorPair& pair,
                                  const std::vector<double>& grid,
                                  double epsilon) {
  if (epsilon <= 0) throw ValidationError("ssf_via_det_phase: epsilon <= 0");
  const auto s0 = eig(pair.base).eigenvalues;
  const auto s1 = eig(pair.perturbed).eigenvalues;
  // D(lambda + i eps) as a rational function of the two spectra
  auto evaluator = [&](double lam) {
    const Complex z(lam, epsilon);
    Complex d(1.0, 0.0);
    for (Eigen::Index k = 0; k < s0.size(); ++k)
      d *= (s1[k] - z) / (s0[k] - z);
    return d;
  };
  const double diam = detail::joint_spectral_diameter(pair);
  const double anchor =
      std::min(grid.empty() ? 0.0 : grid.front(),
               detail::joint_spectral_min(pair) - 0.5 * (diam + 1.0));
  const auto phases = detail::anchored_phases(evaluator, anchor, grid);

  SSFCurve curve;
  curve.grid = grid;
  curve.values.reserve(grid.size());
  for (double ph : phases) curve.values.push_back(ph / kPi);
  curve.normalization = Normalization::ZeroBelowSpectrum;
  return curve;
}

// Symmetrized det2 route with the eta correction of the sandwiched trace
// formula:
//   xi = pi^{-1} Im ln det2(I + sgn(B)|B|^{1/2} R0 |B|^{1/2}) + pi^{-1} Im eta + c,
//   eta(z) = (z - z0) tr(R0(z) B R0(z0)),
// with c fixed by vanishing below the joint spectrum.
inline SSFCurve ssf_symmetrized(const OperatorPair& pair,
                                const std::vector<double>& grid, double epsilon,
                                Complex z0) {
  if (epsilon <= 0) throw ValidationError("ssf_symmetrized: epsilon <= 0");
  if (z0.imag() == 0) throw ValidationError("ssf_symmetrized: Im z0 == 0");
  const auto sd0 = eig(pair.base);
  const auto s1 = eig(pair.perturbed).eigenvalues;
  // B in the eigenbasis of A0; only its diagonal enters tr(B R0) and eta.
  const Matrix b_tilde =
      sd0.eigenvectors.adjoint() * pair.perturbation * sd0.eigenvectors;
  const Eigen::VectorXcd b_diag = b_tilde.diagonal();
  // det2(I + sandwich(z)) = D(z) exp(-tr(B R0(z))) by Sylvester's identity;
  // symmetrized_det2() provides the independent matrix route for tests. The
  // -Im tr(B R0) part of the det2 phase spikes near eigenvalues of A0 and
  // cancels exactly against Im eta, so only the smooth D(z) phase is branch
  // tracked; the two single-valued terms are added per grid point.
  auto evaluator = [&](double lam) {
    const Complex z(lam, epsilon);
    Complex d(1.0, 0.0);
    for (Eigen::Index k = 0; k < sd0.eigenvalues.size(); ++k)
      d *= (s1[k] - z) / (sd0.eigenvalues[k] - z);
    return d;
  };
  auto tr_br0 = [&](Complex z) {
    Complex acc(0.0, 0.0);
    for (Eigen::Index k = 0; k < sd0.eigenvalues.size(); ++k)
      acc += b_diag[k] / (sd0.eigenvalues[k] - z);
    return acc;
  };
  auto eta = [&](Complex z) {
    Complex acc(0.0, 0.0);
    for (Eigen::Index k = 0; k < sd0.eigenvalues.size(); ++k)
      acc += b_diag[k] /
             ((sd0.eigenvalues[k] - z) * (sd0.eigenvalues[k] - z0));
    return (z - z0) * acc;
  };

  const double diam = detail::joint_spectral_diameter(pair);
  const double anchor_pt =
      std::min(grid.empty() ? 0.0 : grid.front(),
               detail::joint_spectral_min(pair) - 0.5 * (diam + 1.0));
  std::vector<double> walk_grid;
  walk_grid.push_back(anchor_pt);
  walk_grid.insert(walk_grid.end(), grid.begin(), grid.end());
  const auto phases = detail::anchored_phases(evaluator, anchor_pt, walk_grid);

  // raw = pi^{-1} [Im ln det2 + Im eta]
  //     = pi^{-1} [Im ln D - Im tr(B R0(z)) + Im eta(z)]
  auto raw_at = [&](double phase, double lam) {
    const Complex z(lam, epsilon);
    return (phase - tr_br0(z).imag() + eta(z).imag()) / kPi;
  };
  const double raw_anchor = raw_at(phases[0], anchor_pt);
  SSFCurve curve;
  curve.grid = grid;
  curve.values.reserve(grid.size());
  for (size_t k = 0; k < grid.size(); ++k)
    curve.values.push_back(raw_at(phases[k + 1], grid[k]) - raw_anchor);
  curve.normalization = Normalization::ZeroBelowSpectrum;
  return curve;
}

// eta'(z) oracle target: tr(R0(z) B R0(z)); exposed for the derivative check.
inline Complex eta_increment(const OperatorPair& pair, Complex z, Complex z0) {
  const auto sd0 = eig(pair.base);
  const Eigen::VectorXcd b_diag =
      (sd0.eigenvectors.adjoint() * pair.perturbation * sd0.eigenvectors)
          .diagonal();
  Complex acc(0.0, 0.0);
  for (Eigen::Index k = 0; k < sd0.eigenvalues.size(); ++k)
    acc += b_diag[k] / ((sd0.eigenvalues[k] - z) * (sd0.eigenvalues[k] - z0));
  return (z - z0) * acc;
}

// ---------------------------------------------------------------------------
// Exact integration helpers against Cayley / Krein weights.
// ---------------------------------------------------------------------------

namespace detail {

// int (a + b*l) / ((l - x0)^2 + y0^2) dl on [lo, hi]
inline double linear_vs_poisson(double a, double b, double x0, double y0,
                                double lo, double hi) {
  auto prim = [&](double l) {
    const double u = l - x0;
    return 0.5 * b * std::log(u * u + y0 * y0) +
           (a + b * x0) / y0 * std::atan(u / y0);
  };
  return prim(hi) - prim(lo);
}

// int c / ((l - x0)^2 + y0^2) dl over a (possibly semi-infinite) interval
inline double const_vs_poisson(double c, double x0, double y0, double lo,
                               double hi) {
  const double alo = std::isinf(lo) ? -0.5 * kPi : std::atan((lo - x0) / y0);
  const double ahi = std::isinf(hi) ? 0.5 * kPi : std::atan((hi - x0) / y0);
  return c * (ahi - alo) / y0;
}

// int (a + b*l) (l - z)^{-2} dl on [lo, hi], z off the real axis
inline Complex linear_vs_krein(double a, double b, Complex z, double lo,
                               double hi) {
  // a + b l = (a + b z) + b (l - z); log branch is continuous since l - z
  // stays in one half-plane while l runs over the reals
  auto prim = [&](double l) {
    const Complex u = l - z;
    return -(a + b * z) / u + b * std::log(u);
  };
  return prim(hi) - prim(lo);
}

}  // namespace detail

// Poisson-weight integral int xi(l) / |l - z0|^2 dl with constant tails
// extended analytically beyond the curve's representation.
inline double poisson_integral(const SSFCurve& curve, Complex z0) {
  const double x0 = z0.real();
  const double y0 = std::abs(z0.imag());
  double acc = 0.0;
  if (curve.has_steps()) {
    const auto& k = curve.knots;
    const auto& lv = curve.levels;
    acc += detail::const_vs_poisson(lv.front(), x0, y0,
                                    -std::numeric_limits<double>::infinity(),
                                    k.front());
    for (size_t j = 0; j + 1 < k.size(); ++j)
      acc += detail::const_vs_poisson(lv[j + 1], x0, y0, k[j], k[j + 1]);
    acc += detail::const_vs_poisson(lv.back(), x0, y0, k.back(),
                                    std::numeric_limits<double>::infinity());
    return acc;
  }
  if (curve.grid.size() < 2)
    throw ValidationError("poisson_integral: empty curve");
  const auto& g = curve.grid;
  const auto& v = curve.values;
  acc += detail::const_vs_poisson(v.front(), x0, y0,
                                  -std::numeric_limits<double>::infinity(),
                                  g.front());
  for (size_t j = 0; j + 1 < g.size(); ++j) {
    const double b = (v[j + 1] - v[j]) / (g[j + 1] - g[j]);
    const double a = v[j] - b * g[j];
    acc += detail::linear_vs_poisson(a, b, x0, y0, g[j], g[j + 1]);
  }
  acc += detail::const_vs_poisson(v.back(), x0, y0, g.back(),
                                  std::numeric_limits<double>::infinity());
  return acc;
}

// int xi(l) (l - z)^{-2} dl, exact on the curve's representation, constant
// tails handled analytically.
inline Complex krein_weight_integral(const SSFCurve& curve, Complex z) {
  Complex acc(0.0, 0.0);
  if (curve.has_steps()) {
    const auto& k = curve.knots;
    const auto& lv = curve.levels;
    // int_{-inf}^{k0} c (l-z)^{-2} = -c/(k0 - z); symmetric tail on the right
    acc += -lv.front() / (k.front() - z);
    for (size_t j = 0; j + 1 < k.size(); ++j)
      acc += lv[j + 1] * (1.0 / (k[j] - z) - 1.0 / (k[j + 1] - z));
    acc += lv.back() / (k.back() - z);
    return acc;
  }
  if (curve.grid.size() < 2)
    throw ValidationError("krein_weight_integral: empty curve");
  const auto& g = curve.grid;
  const auto& v = curve.values;
  acc += -v.front() / (g.front() - z);
  for (size_t j = 0; j + 1 < g.size(); ++j) {
    const double b = (v[j + 1] - v[j]) / (g[j + 1] - g[j]);
    const double a = v[j] - b * g[j];
    acc += detail::linear_vs_krein(a, b, z, g[j], g[j + 1]);
  }
  acc += v.back() / (g.back() - z);
  return acc;
}

// ---------------------------------------------------------------------------
// Cayley normalization, Krein residual, weighted-L1 metric.
// ---------------------------------------------------------------------------

// Im tr ln(U(z0) U0(z0)^{-1}) with principal arguments on the unit circle.
inline double cayley_phase_target(const OperatorPair& pair, Complex z0) {
  if (z0.imag() <= 0) throw ValidationError("cayley: Im z0 must be > 0");
  const Complex z0bar = std::conj(z0);
  const Matrix id = Matrix::Identity(pair.dim(), pair.dim());
  const Matrix u = (pair.perturbed.entries() - z0 * id) *
                   resolvent(pair.perturbed, z0bar);
  const Matrix u0inv =
      (pair.base.entries() - z0bar * id) * resolvent(pair.base, z0);
  Eigen::ComplexEigenSolver<Matrix> solver(u * u0inv, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("cayley: eigensolver failure");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
    acc += std::arg(solver.eigenvalues()[k]);
  return acc;
}

// Shifts the curve by the unique kappa solving
//   2 Im(z0) int (xi + kappa)/|l - z0|^2 dl = Im tr ln(U U0^{-1}).
inline SSFCurve cayley_normalize(const SSFCurve& curve, const OperatorPair& pair,
                                 Complex z0) {
  if (!curve.has_steps() && !curve.grid.empty()) {
    const double reach = 20.0 * std::max(1.0, std::abs(z0));
    if (curve.grid.front() > z0.real() - reach ||
        curve.grid.back() < z0.real() + reach)
      throw ValidationError("cayley_normalize: curve grid too short for z0");
  }
  const double target = cayley_phase_target(pair, z0);
  const double y0 = z0.imag();
  const double base_integral = poisson_integral(curve, z0);
  // the constant shift carries full-line Poisson weight pi / Im(z0)
  const double kappa = (target / (2.0 * y0) - base_integral) / (kPi / y0);
  SSFCurve out = curve;
  for (auto& v : out.values) v += kappa;
  for (auto& l : out.levels) l += kappa;
  out.normalization = Normalization::Cayley;
  return out;
}

// tr(R_A - R_A0) + int xi/(l - z)^2 dl; ~0 for a correctly normalized curve.
inline Complex krein_residual(const OperatorPair& pair, const SSFCurve& curve,
                              Complex z) {
  const auto s0 = eig(pair.base).eigenvalues;
  const auto s1 = eig(pair.perturbed).eigenvalues;
  Complex tr_diff(0.0, 0.0);
  for (Eigen::Index k = 0; k < s0.size(); ++k)
    tr_diff += 1.0 / (s1[k] - z) - 1.0 / (s0[k] - z);
  return tr_diff + krein_weight_integral(curve, z);
}

// Trapezoidal int |a - b| (nu^2 + 1)^{-1} dnu on the union grid.
inline double weighted_L1_distance(const SSFCurve& a, const SSFCurve& b) {
  std::vector<double> grid;
  auto span = [](const SSFCurve& c) {
    if (c.has_steps()) return std::pair(c.knots.front(), c.knots.back());
    if (c.grid.empty())
      throw ValidationError("weighted_L1_distance: empty curve");
    return std::pair(c.grid.front(), c.grid.back());
  };
  const auto [alo, ahi] = span(a);
  const auto [blo, bhi] = span(b);
  const double lo = std::min(alo, blo), hi = std::max(ahi, bhi);
  if (!(lo < hi)) throw ValidationError("weighted_L1_distance: no coverage");
  if (!a.has_steps() && !b.has_steps() && (ahi < blo || bhi < alo))
    throw ValidationError("weighted_L1_distance: disjoint grid supports");
  // pad so the (nu^2+1)^{-1} weight sees the constant tails decaying
  const double pad = 10.0 * std::max(1.0, hi - lo);
  const int n = 4001;
  grid.reserve(n);
  for (int i = 0; i < n; ++i)
    grid.push_back(lo - pad + (hi - lo + 2 * pad) * i / (n - 1.0));
  std::vector<double> integrand(grid.size());
  for (size_t i = 0; i < grid.size(); ++i)
    integrand[i] =
        std::abs(a.eval(grid[i]) - b.eval(grid[i])) / (grid[i] * grid[i] + 1.0);
  return trapezoid(grid, integrand);
}

}  // namespace witten
