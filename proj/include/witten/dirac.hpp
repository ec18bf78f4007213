#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "witten/determinant.hpp"
#include "witten/model.hpp"
#include "witten/pushnitski.hpp"
#include "witten/quadrature.hpp"

namespace witten {

// Scalar potential phi on the line plus the switching function theta, with
// closed-form integral and an effective support radius (tail below 1e-10).
struct DiracProfile {
  std::string name;  // "gaussian" | "sech2"
  double amplitude = 0.0;
  double width = 1.0;
  double center = 0.0;

  DiracProfile(std::string profile, double a, double w, double c = 0.0)
      : name(std::move(profile)), amplitude(a), width(w), center(c) {
    if (name != "gaussian" && name != "sech2")
      throw ValidationError("DiracProfile: unknown profile '" + name + "'");
    if (!(width > 0.0)) throw ValidationError("DiracProfile: width must be > 0");
    if (!std::isfinite(amplitude))
      throw ValidationError("DiracProfile: non-finite amplitude");
  }

  double phi(double x) const {
    const double u = (x - center) / width;
    if (name == "gaussian") return amplitude * std::exp(-0.5 * u * u);
    const double c = std::cosh(u);
    return amplitude / (c * c);
  }

  double integral() const {
    if (name == "gaussian") return amplitude * width * std::sqrt(2.0 * kPi);
    return 2.0 * amplitude * width;
  }

  double support_radius() const {
    return name == "gaussian" ? 9.0 * width : 16.0 * width;
  }

  static double theta(double t) { return 0.5 * (1.0 + std::tanh(t)); }
  static double theta_prime(double t) {
    const double c = std::cosh(t);
    return 0.5 / (c * c);
  }
};

// Makes profiles with a prescribed integral: gaussian amplitude
// I/(w sqrt(2 pi)), sech2 amplitude I/(2w).
inline DiracProfile profile_with_integral(const std::string& name,
                                          double integral_value, double width,
                                          double center = 0.0) {
  const double a = name == "gaussian"
                       ? integral_value / (width * std::sqrt(2.0 * kPi))
                       : integral_value / (2.0 * width);
  return DiracProfile(name, a, width, center);
}

// Kernel of (A_- - (nu + i eps))^{-1} for A_- = -i d/dx: causal exponential,
// value i/2 on the diagonal (symmetric limit).
inline Complex free_resolvent_kernel(double nu, double eps, double x, double y) {
  if (eps < 0.0) throw ValidationError("free_resolvent_kernel: eps < 0");
  const double u = x - y;
  if (u < 0.0) return Complex(0.0, 0.0);
  const Complex phase = std::exp(Complex(0.0, 1.0) * Complex(nu, eps) * u);
  return (u == 0.0 ? 0.5 : 1.0) * Complex(0.0, 1.0) * phase;
}

// Kernel of chi_n(A_-)(A_- - (nu + i eps))^{-1} chi_n(A_-): the momentum
// integral int dk/2pi e^{iku} n^2/(k^2+n^2) (k - nu - i eps)^{-1} closed by
// residues (poles k = nu + i eps treated as the boundary value from above,
// and k = +-i n).
inline Complex smoothed_resolvent_kernel(double nu, double eps, int n, double x,
                                         double y) {
  if (eps < 0.0) throw ValidationError("smoothed_resolvent_kernel: eps < 0");
  if (n < 1) throw ValidationError("smoothed_resolvent_kernel: n must be >= 1");
  const Complex zeta(nu, eps);
  const Complex i_n(0.0, static_cast<double>(n));
  if (std::abs(zeta - i_n) < 1e-10 || std::abs(zeta + i_n) < 1e-10)
    throw NumericalError("smoothed_resolvent_kernel: pole collision at n = " +
                         std::to_string(n));
  const double u = x - y;
  const Complex i(0.0, 1.0);
  const double n2 = static_cast<double>(n) * n;
  if (u >= 0.0) {
    const Complex pole_zeta = std::exp(i * zeta * u) * n2 / (n2 + zeta * zeta);
    const Complex pole_in =
        std::exp(-n * u) * n2 / (2.0 * i_n * (i_n - zeta));
    return i * (pole_zeta + pole_in);
  }
  return -i * std::exp(n * u) * n2 / (2.0 * i_n * (i_n + zeta));
}

struct KernelOperator {
  std::vector<double> nodes;
  std::vector<double> weights;
  Matrix kernel_matrix;  // sqrt(w_i) K(x_i, x_j) sqrt(w_j)

  double hs_norm() const { return kernel_matrix.norm(); }
};

// sgn(phi(x)) |phi(x)|^{1/2} K_n(x, y) |phi(y)|^{1/2} on a Gauss-Legendre rule
// over the profile support, symmetric sqrt(w) weighting.
inline KernelOperator assemble_sandwiched(const DiracProfile& profile, double nu,
                                          double eps, int n, int nodes = 400) {
  const double r = profile.support_radius();
  const double lo = profile.center - r, hi = profile.center + r;
  const double spacing = (hi - lo) / nodes;
  if (std::abs(nu) > 0.0 && spacing > (2.0 * kPi / std::abs(nu)) / 8.0)
    throw ValidationError(
        "assemble_sandwiched: node spacing " + std::to_string(spacing) +
        " cannot resolve e^{i nu x}; need <= " +
        std::to_string((2.0 * kPi / std::abs(nu)) / 8.0));
  const QuadratureRule rule = gauss_legendre(nodes, lo, hi);
  KernelOperator op;
  op.nodes = rule.nodes;
  op.weights = rule.weights;
  std::vector<double> signed_sqrt_phi(nodes), sqrt_phi(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double p = profile.phi(rule.nodes[j]);
    sqrt_phi[j] = std::sqrt(std::abs(p));
    signed_sqrt_phi[j] = (p < 0.0 ? -1.0 : 1.0) * sqrt_phi[j];
  }
  op.kernel_matrix.resize(nodes, nodes);
  for (int a = 0; a < nodes; ++a)
    for (int b = 0; b < nodes; ++b)
      op.kernel_matrix(a, b) =
          std::sqrt(rule.weights[a]) * signed_sqrt_phi[a] *
          smoothed_resolvent_kernel(nu, eps, n, rule.nodes[a], rule.nodes[b]) *
          sqrt_phi[b] * std::sqrt(rule.weights[b]);
  return op;
}

// xi_n(nu) = pi^{-1} Im ln det2(I + sandwiched(nu))
//            + (1/2pi) n^2/(nu^2+n^2) int phi,
// branch anchored at the grid end with the largest |nu| where the det2 phase
// is closest to zero.
inline SSFCurve dirac_ssf(const DiracProfile& profile,
                          const std::vector<double>& nu_grid, int n,
                          double eps = 0.0, int nodes = 400, int threads = 1) {
  if (nu_grid.size() < 2) throw ValidationError("dirac_ssf: need >= 2 nu points");
  for (size_t k = 0; k + 1 < nu_grid.size(); ++k)
    if (!(nu_grid[k] < nu_grid[k + 1]))
      throw ValidationError("dirac_ssf: nu grid not increasing");

  auto det_at = [&](double nu) {
    return det2_plus_lu(assemble_sandwiched(profile, nu, eps, n, nodes).kernel_matrix);
  };

  // parallel map over the grid, serial unwinding afterwards
  std::vector<Complex> dets(nu_grid.size());
  if (threads <= 1) {
    for (size_t k = 0; k < nu_grid.size(); ++k) dets[k] = det_at(nu_grid[k]);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (size_t k = next.fetch_add(1); k < nu_grid.size();
             k = next.fetch_add(1)) {
          try {
            dets[k] = det_at(nu_grid[k]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
  }
  for (size_t k = 0; k < dets.size(); ++k)
    if (std::abs(dets[k]) == 0.0)
      throw NumericalError("dirac_ssf: det2 vanishes at nu = " +
                           std::to_string(nu_grid[k]));

  // anchor at the larger-|nu| end; walk toward the other end, bisecting on
  // demand when the wrapped argument jump is too large
  const bool from_right = std::abs(nu_grid.back()) >= std::abs(nu_grid.front());
  std::vector<double> phases(nu_grid.size());
  const int i0 = from_right ? static_cast<int>(nu_grid.size()) - 1 : 0;
  const int di = from_right ? -1 : 1;
  phases[i0] = std::arg(dets[i0]);
  for (int k = i0; k + di >= 0 && k + di < static_cast<int>(nu_grid.size());
       k += di) {
    double phase = phases[k];
    Complex d = dets[k];
    detail::walk_phase(det_at, nu_grid[k], d, phase, nu_grid[k + di],
                       dets[k + di]);
    phases[k + di] = phase;
  }

  SSFCurve curve;
  curve.normalization = Normalization::Cayley;
  curve.grid = nu_grid;
  const double integral_phi = profile.integral();
  const double n2 = static_cast<double>(n) * n;
  for (size_t k = 0; k < nu_grid.size(); ++k) {
    const double additive =
        (1.0 / (2.0 * kPi)) * n2 / (nu_grid[k] * nu_grid[k] + n2) * integral_phi;
    curve.values.push_back(phases[k] / kPi + additive);
  }
  return curve;
}

struct DiracWittenReport {
  WittenReport report;
  double reference = 0.0;  // (1/2pi) int phi
  double error = 0.0;
  int n_used = 0;
};

inline DiracWittenReport dirac_witten(const DiracProfile& profile,
                                      const std::vector<int>& n_sequence,
                                      double nu_max = 5.0, int nu_points = 201,
                                      double eps = 0.0, int nodes = 400,
                                      int threads = 1) {
  if (n_sequence.empty()) throw ValidationError("dirac_witten: empty n sequence");
  const int n = *std::max_element(n_sequence.begin(), n_sequence.end());
  std::vector<double> nu_grid(nu_points);
  for (int k = 0; k < nu_points; ++k)
    nu_grid[k] = -nu_max + 2.0 * nu_max * k / (nu_points - 1.0);
  const SSFCurve xi = dirac_ssf(profile, nu_grid, n, eps, nodes, threads);
  DiracWittenReport out;
  out.n_used = n;
  out.report = witten_from_ssf(xi, 0.5, 1e-3);
  out.reference = profile.integral() / (2.0 * kPi);
  out.error = std::abs(out.report.witten_index - out.reference);
  return out;
}

struct DiracDirectModel {
  ModelDiscretization model;
  double nu_resolution_floor;  // periodic-box momentum spacing pi/L
};

// (t, x)-grid discretization of d/dt + A(t), A(t) = -i d/dx + theta(t) phi:
// spectral antisymmetric derivative on the periodic box [-L, L), diagonal
// multiplication by phi, tanh switching in t.
inline DiracDirectModel dirac_direct_model(const DiracProfile& profile, double T,
                                           int n_t, double L, int n_x) {
  if (static_cast<long>(n_t) * n_x > kDenseDimBudget)
    throw BudgetError("dirac_direct_model: dim " + std::to_string(n_t * n_x) +
                      " exceeds dense budget");
  std::vector<double> x(n_x);
  const double hx = 2.0 * L / n_x;
  for (int j = 0; j < n_x; ++j) x[j] = -L + hx * j;
  const Eigen::MatrixXd dx = derivative_matrix(x, TimeScheme::SpectralPeriodic);
  const Matrix a_minus = Complex(0.0, -1.0) * dx.cast<Complex>();
  Matrix b_plus = Matrix::Zero(n_x, n_x);
  for (int j = 0; j < n_x; ++j) b_plus(j, j) = profile.phi(x[j]);
  const OperatorPath path =
      tanh_switch_path(HermitianOperator(a_minus), b_plus, T, n_t);
  DiracDirectModel out{assemble_DA(path, TimeScheme::FiniteDifferenceDirichlet),
                       kPi / L};
  return out;
}

}  // namespace witten
