#pragma once

#include <vector>

#include "witten/ssf.hpp"

namespace witten {

// chi_n(nu) = n / (nu^2 + n^2)^{1/2}
inline double chi_n(double nu, double n) {
  return n / std::sqrt(nu * nu + n * n);
}

// chi~_s(nu) = [(1 - s) nu^2 + 1]^{-1/2}; chi_n == chi~_{1 - n^{-2}}
inline double chi_tilde(double nu, double s) {
  return 1.0 / std::sqrt((1.0 - s) * nu * nu + 1.0);
}

// A_{+,n} = A_- + chi_n(A_-) B_+ chi_n(A_-) over an ascending n grid.
struct CutoffFamily {
  HermitianOperator a_minus;
  Matrix b_plus;
  std::vector<int> n_values;
  std::vector<OperatorPair> approximants;   // (A_-, A_{+,n})
  std::vector<double> perturbation_trace_norms;  // ||chi_n B chi_n||_1
};

inline Matrix smoothed_perturbation(const HermitianOperator& a_minus,
                                    const Matrix& b, double n_or_infinite_scale) {
  const double n = n_or_infinite_scale;
  const Matrix chi =
      apply_function(a_minus, [n](double nu) { return Complex(chi_n(nu, n), 0.0); });
  Matrix out = chi * b * chi;
  return 0.5 * (out + out.adjoint().eval());
}

inline CutoffFamily build_cutoff_family(const HermitianOperator& a_minus,
                                        const Matrix& b_plus,
                                        const std::vector<int>& n_values) {
  if (b_plus.rows() != a_minus.dim() || b_plus.cols() != a_minus.dim())
    throw ValidationError("build_cutoff_family: dimension mismatch");
  CutoffFamily family{a_minus, b_plus, n_values, {}, {}};
  family.approximants.reserve(n_values.size());
  for (int n : n_values) {
    if (n < 1) throw ValidationError("build_cutoff_family: n must be >= 1");
    const Matrix bn = smoothed_perturbation(a_minus, b_plus, n);
    family.approximants.emplace_back(a_minus, bn);
    family.perturbation_trace_norms.push_back(trace_norm(bn));
  }
  return family;
}

// A_+(s) = A_- + chi~_s(A_-) B_+ chi~_s(A_-); A_+(0) = A_{+,1}, A_+(1) = A_+.
inline std::vector<OperatorPair> interpolation_family(
    const HermitianOperator& a_minus, const Matrix& b_plus,
    const std::vector<double>& s_values) {
  std::vector<OperatorPair> out;
  out.reserve(s_values.size());
  for (double s : s_values) {
    if (s < 0.0 || s > 1.0)
      throw ValidationError("interpolation_family: s outside [0,1]");
    const Matrix chi = apply_function(
        a_minus, [s](double nu) { return Complex(chi_tilde(nu, s), 0.0); });
    Matrix bs = chi * b_plus * chi;
    bs = 0.5 * (bs + bs.adjoint().eval());
    out.emplace_back(a_minus, bs);
  }
  return out;
}

// Trace-norm distance of resolvent differences. Pairs sharing a base reduce
// to ||R_{A_a}(z) - R_{A_b}(z)||_1.
inline double resolvent_trace_distance(const OperatorPair& pair_a,
                                       const OperatorPair& pair_b, Complex z) {
  const Matrix da =
      resolvent(pair_a.perturbed, z) - resolvent(pair_a.base, z);
  const Matrix db =
      resolvent(pair_b.perturbed, z) - resolvent(pair_b.base, z);
  return trace_norm(da - db);
}

struct ConvergenceRow {
  int n;
  double distance_b1;   // trace-norm resolvent-difference distance at z = i
  double distance_wl1;  // weighted-L1 xi distance to the reference
  double moment;        // int xi_n g dnu for the supplied weight
};

// Distances ||xi(.; A_{+,n}, A_-) - reference|| in L1((nu^2+1)^{-1} dnu) plus
// the weighted moments int xi_n g dnu for a caller-supplied bounded g.
inline std::vector<ConvergenceRow> ssf_convergence_report(
    const CutoffFamily& family, const SSFCurve& reference,
    const std::function<double(double)>& g = [](double nu) {
      return 1.0 / (nu * nu + 1.0);
    }) {
  std::vector<ConvergenceRow> rows;
  rows.reserve(family.n_values.size());
  const OperatorPair full(family.a_minus,
                          HermitianOperator(family.a_minus.entries() + family.b_plus));
  for (size_t k = 0; k < family.n_values.size(); ++k) {
    const auto& pair = family.approximants[k];
    const SSFCurve xi_n = ssf_counting(pair, {});
    ConvergenceRow row;
    row.n = family.n_values[k];
    row.distance_b1 = resolvent_trace_distance(pair, full, Complex(0.0, 1.0));
    row.distance_wl1 = weighted_L1_distance(xi_n, reference);
    // exact piecewise integration of the counting curve against g
    double moment = 0.0;
    for (size_t j = 0; j + 1 < xi_n.knots.size(); ++j) {
      const double level = xi_n.levels[j + 1];
      if (level == 0.0) continue;
      moment += level * adaptive_simpson(g, xi_n.knots[j], xi_n.knots[j + 1], 1e-12);
    }
    row.moment = moment;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace witten
