#pragma once

#include <optional>
#include <vector>

#include "witten/cutoff.hpp"
#include "witten/ssf.hpp"

namespace witten {

// Sampled family {t_k, B(t_k), B'(t_k)} realizing A(t) = A_- + B(t).
struct OperatorPath {
  std::vector<double> t_grid;          // strictly increasing
  std::vector<Matrix> b_samples;       // Hermitian B(t_k)
  std::vector<Matrix> b_prime_samples; // Hermitian B'(t_k)
  HermitianOperator a_minus;

  OperatorPath(std::vector<double> t, std::vector<Matrix> b,
               std::vector<Matrix> bp, HermitianOperator am,
               double delta_left = 1e-6)
      : t_grid(std::move(t)),
        b_samples(std::move(b)),
        b_prime_samples(std::move(bp)),
        a_minus(std::move(am)) {
    const size_t nt = t_grid.size();
    if (nt < 3 || b_samples.size() != nt || b_prime_samples.size() != nt)
      throw ValidationError("OperatorPath: inconsistent sample counts");
    for (size_t k = 0; k + 1 < nt; ++k)
      if (!(t_grid[k] < t_grid[k + 1]))
        throw ValidationError("OperatorPath: t grid not increasing");
    const int n = a_minus.dim();
    for (size_t k = 0; k < nt; ++k)
      if (b_samples[k].rows() != n || b_prime_samples[k].rows() != n)
        throw ValidationError("OperatorPath: sample dimension mismatch");
    if (operator_norm(b_samples.front()) > delta_left)
      throw ValidationError("OperatorPath: B(t_0) does not vanish (left asymptote)");
    // trapezoidal int B' dt must reproduce B(t_end) - B(t_0); a 5% relative
    // defect is far above the O(h^2) quadrature error of any sane sampling
    Matrix acc = Matrix::Zero(n, n);
    for (size_t k = 0; k + 1 < nt; ++k) {
      const double h = t_grid[k + 1] - t_grid[k];
      acc += 0.5 * h * (b_prime_samples[k] + b_prime_samples[k + 1]);
    }
    const Matrix target = b_samples.back() - b_samples.front();
    const double scale = std::max(1.0, operator_norm(target));
    if (operator_norm(acc - target) > 0.05 * scale)
      throw ValidationError("OperatorPath: int B' dt inconsistent with B endpoints");
  }

  int spatial_dim() const { return a_minus.dim(); }
  size_t nt() const { return t_grid.size(); }

  HermitianOperator a_plus() const {
    return HermitianOperator(a_minus.entries() + b_samples.back());
  }
  OperatorPair asymptote_pair() const {
    return OperatorPair(a_minus, a_plus());
  }
};

// Scalar switching path B(t) = b_plus * s((t+shift)), shipped test shapes.
inline OperatorPath tanh_switch_path(const HermitianOperator& a_minus,
                                     const Matrix& b_plus, double t_half,
                                     int n_t) {
  std::vector<double> t(n_t);
  std::vector<Matrix> b(n_t), bp(n_t);
  for (int k = 0; k < n_t; ++k) {
    t[k] = -t_half + 2.0 * t_half * k / (n_t - 1.0);
    const double s = 0.5 * (1.0 + std::tanh(t[k]));
    const double c = std::cosh(t[k]);
    const double sp = 0.5 / (c * c);
    b[k] = s * b_plus;
    bp[k] = sp * b_plus;
  }
  return OperatorPath(std::move(t), std::move(b), std::move(bp), a_minus,
                      operator_norm(b_plus) * (1.0 - std::tanh(t_half)));
}

// chi_n-smoothed companion path: B_n(t) = chi_n(A_-) B(t) chi_n(A_-).
inline OperatorPath apply_cutoff(const OperatorPath& path, int n) {
  const Matrix chi = apply_function(
      path.a_minus, [n](double nu) { return Complex(chi_n(nu, n), 0.0); });
  auto sandwich = [&](const Matrix& m) {
    Matrix out = chi * m * chi;
    return Matrix(0.5 * (out + out.adjoint().eval()));
  };
  std::vector<Matrix> b, bp;
  b.reserve(path.nt());
  bp.reserve(path.nt());
  for (size_t k = 0; k < path.nt(); ++k) {
    b.push_back(sandwich(path.b_samples[k]));
    bp.push_back(sandwich(path.b_prime_samples[k]));
  }
  const double left = operator_norm(b.front()) + 1e-12;
  return OperatorPath(path.t_grid, std::move(b), std::move(bp), path.a_minus,
                      left);
}

enum class TimeScheme { FiniteDifferenceDirichlet, SpectralPeriodic };

// Antisymmetric first-derivative matrix on the path's (uniform) time grid.
inline Eigen::MatrixXd derivative_matrix(const std::vector<double>& t,
                                         TimeScheme scheme) {
  const int n = static_cast<int>(t.size());
  const double h = t[1] - t[0];
  for (int k = 0; k + 1 < n; ++k)
    if (std::abs((t[k + 1] - t[k]) - h) > 1e-9 * h)
      throw ValidationError("derivative_matrix: nonuniform t grid");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  if (scheme == TimeScheme::FiniteDifferenceDirichlet) {
    for (int k = 0; k < n; ++k) {
      if (k + 1 < n) d(k, k + 1) = 0.5 / h;
      if (k - 1 >= 0) d(k, k - 1) = -0.5 / h;
    }
    return d;
  }
  // Fourier differentiation matrix on a periodic grid of period n*h
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const double sgn = ((j - k) % 2 == 0) ? 1.0 : -1.0;
      const double arg = kPi * (j - k) / n;
      if (n % 2 == 1)
        d(j, k) = (kPi / (n * h)) * sgn / std::sin(arg);
      else
        d(j, k) = (kPi / (n * h)) * sgn / std::tan(arg);
    }
  return d;
}

struct ModelDiscretization {
  TimeScheme scheme;
  Matrix d_operator;       // D; rectangular for the finite-difference scheme
  Matrix reduction;        // isometry V onto the admissible node subspace
  HermitianOperator h1;    // D* D
  HermitianOperator h2;    // D D*
  HermitianOperator h0;    // -d^2/dt^2 (x) I + I (x) A_-^2 on the node grid
  double t_half;
  int n_t;
  int n_spatial;
  std::string warning;     // resolution warnings, empty when clean

  SpectralDecomposition h1_eig;
  SpectralDecomposition h2_eig;
};

namespace detail {

inline Matrix kron_time_spatial(const Eigen::MatrixXd& dt, int n_spatial) {
  const int rows = static_cast<int>(dt.rows());
  const int cols = static_cast<int>(dt.cols());
  Matrix out = Matrix::Zero(rows * n_spatial, cols * n_spatial);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (dt(i, j) != 0.0)
        for (int s = 0; s < n_spatial; ++s)
          out(i * n_spatial + s, j * n_spatial + s) = dt(i, j);
  return out;
}

inline Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  const int n = static_cast<int>(blocks.front().rows());
  const int nt = static_cast<int>(blocks.size());
  Matrix out = Matrix::Zero(nt * n, nt * n);
  for (int k = 0; k < nt; ++k)
    out.block(k * n, k * n, n, n) = blocks[k];
  return out;
}

// (n_t - 1) x n_t midpoint difference matrix: (v_{k+1} - v_k) / h.
inline Eigen::MatrixXd midpoint_difference(int n_t, double h) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_t - 1, n_t);
  for (int k = 0; k + 1 < n_t; ++k) {
    d(k, k) = -1.0 / h;
    d(k, k + 1) = 1.0 / h;
  }
  return d;
}

// Second-difference Laplacians induced by the midpoint scheme: the node-side
// form has free (natural) ends, the midpoint-side form Dirichlet-type ends.
inline Eigen::MatrixXd laplacian_node(int n_t, double h) {
  const Eigen::MatrixXd d = midpoint_difference(n_t, h);
  return d.transpose() * d;
}

inline Eigen::MatrixXd laplacian_mid(int n_t, double h) {
  const Eigen::MatrixXd d = midpoint_difference(n_t, h);
  return d * d.transpose();
}

// Columns of the admissible-subspace isometry at one boundary node: the
// eigendirections of the asymptote along which a whole-line solution of
// v' = -Av stays bounded (nonpositive spectrum at the left end, strictly
// positive at the right). Marginal directions are admitted on the left only,
// so the resulting index counts strictly-positive eigenvalues on both
// asymptotes: index = #{mu > 0}(A_+) - #{mu > 0}(A_-). In particular a
// constant path (B = 0) has index 0 even when the asymptote is singular.
inline Matrix boundary_basis(const HermitianOperator& asymptote, bool left) {
  const SpectralDecomposition sd = eig(asymptote);
  const double tol = 1e-10 * std::max(1.0, operator_norm(asymptote.entries()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    const double mu = sd.eigenvalues[k];
    if ((left && mu < tol) || (!left && mu > tol)) keep.push_back(k);
  }
  Matrix out(asymptote.dim(), static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = sd.eigenvectors.col(keep[j]);
  return out;
}

// Sampled decomposition pair on the node grid:
//   G_j = -Lap (x) I + blockdiag(A(t_k)^2 + (-1)^j B'(t_k)),
// with A^2 = A_-^2 + B A_- + A_- B + B^2 expanded exactly.  G_2 - G_1 equals
// 2 blockdiag(B') to machine precision, which makes the factorized
// resolvent-difference identity exact on this pair.
inline std::pair<Matrix, Matrix> decomposition_pair(const OperatorPath& path) {
  const int n = path.spatial_dim();
  const int nt = static_cast<int>(path.nt());
  const double h = path.t_grid[1] - path.t_grid[0];
  const Matrix kinetic = kron_time_spatial(laplacian_node(nt, h), n);
  std::vector<Matrix> pot1(nt), pot2(nt);
  for (int k = 0; k < nt; ++k) {
    const Matrix a = path.a_minus.entries() + path.b_samples[k];
    const Matrix a2 = a * a;
    pot1[k] = a2 - path.b_prime_samples[k];
    pot2[k] = a2 + path.b_prime_samples[k];
  }
  return {kinetic + block_diagonal(pot1), kinetic + block_diagonal(pot2)};
}

}  // namespace detail

// Discretize D_A = d/dt + A(t) and form the exact singular pair H_1 = D*D,
// H_2 = D D*.
//
// Finite-difference scheme: the derivative acts from the N_t node values to
// the N_t - 1 interval midpoints (second-order Crank-Nicolson stencil with
// A averaged to the midpoint), and the node space is reduced to the
// directions along which a whole-line solution can decay: components of
// v(t_0) along nonnegative eigendirections of A_- and of v(t_end) along
// nonpositive eigendirections of A_+ are removed.  A square truncation
// cannot work here: for square D the spectra of D*D and DD* coincide
// identically, so every near-zero count and Delta_r would vanish.  With the
// reduction, dim ker D - dim ker D* reproduces the spectral flow of the
// path while H_1/H_2 keep exact singular-value duality and positivity.
//
// Spectral-periodic scheme: square D = D_t (x) I + blockdiag(A(t_k)) for
// constant-coefficient sanity checks.
inline ModelDiscretization assemble_DA(const OperatorPath& path,
                                       TimeScheme scheme,
                                       bool strict_resolution = false) {
  const int n = path.spatial_dim();
  const int nt = static_cast<int>(path.nt());
  if (nt * n > kDenseDimBudget)
    throw BudgetError("assemble_DA: dim " + std::to_string(nt * n) +
                      " exceeds dense budget " + std::to_string(kDenseDimBudget));
  const double h = path.t_grid[1] - path.t_grid[0];

  std::string warning;
  double sup_bp = 0.0;
  for (const auto& bp : path.b_prime_samples)
    sup_bp = std::max(sup_bp, operator_norm(bp));
  if (sup_bp * h > 1.0) {
    warning = "time grid too coarse: sup||B'|| * h = " +
              std::to_string(sup_bp * h);
    if (strict_resolution) throw ValidationError("assemble_DA: " + warning);
  }

  Matrix d;
  Matrix reduction;
  if (scheme == TimeScheme::SpectralPeriodic) {
    const double mismatch =
        operator_norm(path.b_samples.back() - path.b_samples.front());
    if (mismatch > 1e-8)
      warning += std::string(warning.empty() ? "" : "; ") +
                 "periodic derivative with non-periodic B(t), endpoint mismatch " +
                 std::to_string(mismatch);
    const Eigen::MatrixXd dt = derivative_matrix(path.t_grid, scheme);
    std::vector<Matrix> a_blocks(path.nt());
    for (size_t k = 0; k < path.nt(); ++k)
      a_blocks[k] = path.a_minus.entries() + path.b_samples[k];
    d = detail::kron_time_spatial(dt, n) + detail::block_diagonal(a_blocks);
    reduction = Matrix::Identity(nt * n, nt * n);
  } else {
    // midpoint map M, then D = M V on the admissible node subspace
    Matrix m = detail::kron_time_spatial(detail::midpoint_difference(nt, h), n);
    for (int k = 0; k + 1 < nt; ++k) {
      const Matrix a_mid =
          path.a_minus.entries() +
          0.5 * (path.b_samples[k] + path.b_samples[k + 1]);
      m.block(k * n, k * n, n, n) += 0.5 * a_mid;
      m.block(k * n, (k + 1) * n, n, n) += 0.5 * a_mid;
    }
    const Matrix left = detail::boundary_basis(path.a_minus, /*left=*/true);
    const Matrix right = detail::boundary_basis(path.a_plus(), /*left=*/false);
    const Eigen::Index dim_v =
        left.cols() + static_cast<Eigen::Index>(nt - 2) * n + right.cols();
    reduction = Matrix::Zero(nt * n, dim_v);
    reduction.block(0, 0, n, left.cols()) = left;
    for (int k = 1; k + 1 < nt; ++k)
      reduction.block(k * n, left.cols() + (k - 1) * n, n, n) =
          Matrix::Identity(n, n);
    reduction.block((nt - 1) * n, dim_v - right.cols(), n, right.cols()) =
        right;
    d = m * reduction;
  }

  const Eigen::MatrixXd lap =
      scheme == TimeScheme::SpectralPeriodic
          ? Eigen::MatrixXd(-(derivative_matrix(path.t_grid, scheme) *
                              derivative_matrix(path.t_grid, scheme)))
          : detail::laplacian_node(nt, h);
  const Matrix a2 = path.a_minus.entries() * path.a_minus.entries();
  const Matrix h0 = detail::kron_time_spatial(lap, n) +
                    detail::block_diagonal(std::vector<Matrix>(path.nt(), a2));

  ModelDiscretization model{
      scheme,
      d,
      reduction,
      HermitianOperator(d.adjoint() * d),
      HermitianOperator(d * d.adjoint()),
      HermitianOperator(h0),
      0.5 * (path.t_grid.back() - path.t_grid.front()),
      nt,
      n,
      warning,
      {},
      {}};
  model.h1_eig = eig(model.h1);
  model.h2_eig = eig(model.h2);
  return model;
}

// max_j ||H_j - [H0 + B A_- + A_- B + B^2 + (-1)^j B']||_F / ||H_j||_F with
// the sampled B', both sides reduced to the space H_j acts on; O(h^2) since
// the scheme's cross terms reproduce A' only in the continuum limit.  The
// first and last time blocks are excluded from the comparison: the one-sided
// boundary stencils differ from the centered decomposition at O(1/h) there,
// which is a boundary artifact rather than a statement about the bulk
// identity.
inline double decomposition_residual(const ModelDiscretization& model,
                                     const OperatorPath& path) {
  const int n = model.n_spatial;
  const int nt = model.n_t;
  const auto [g1, g2] = detail::decomposition_pair(path);

  if (model.scheme == TimeScheme::SpectralPeriodic) {
    // same node space; swap in the spectral kinetic part
    const Matrix kin_fd =
        detail::kron_time_spatial(
            detail::laplacian_node(nt, path.t_grid[1] - path.t_grid[0]), n);
    const Matrix kin_sp = model.h0.entries() -
                          detail::block_diagonal(std::vector<Matrix>(
                              path.nt(), Matrix(path.a_minus.entries() *
                                                path.a_minus.entries())));
    const Matrix ref1 = g1 - kin_fd + kin_sp;
    const Matrix ref2 = g2 - kin_fd + kin_sp;
    const double r1 =
        (model.h1.entries() - ref1).norm() / model.h1.entries().norm();
    const double r2 =
        (model.h2.entries() - ref2).norm() / model.h2.entries().norm();
    return std::max(r1, r2);
  }

  const Matrix& v = model.reduction;
  const double h = path.t_grid[1] - path.t_grid[0];

  // node side: project the decomposition onto the admissible subspace
  Matrix diff1 = model.h1.entries() - v.adjoint() * g1 * v;
  // columns [0, p) sit on node 0 and [cols - q, cols) on node nt-1
  Eigen::Index p = 0;
  while (p < v.cols() && v.col(p).segment(n, (nt - 1) * n).norm() < 1e-14) ++p;
  Eigen::Index q = 0;
  while (q < v.cols() &&
         v.col(v.cols() - 1 - q).segment(0, (nt - 1) * n).norm() < 1e-14)
    ++q;
  auto mask_ends = [](Matrix& mmat, Eigen::Index head, Eigen::Index tail) {
    if (head > 0) {
      mmat.topRows(head).setZero();
      mmat.leftCols(head).setZero();
    }
    if (tail > 0) {
      mmat.bottomRows(tail).setZero();
      mmat.rightCols(tail).setZero();
    }
  };
  // when a boundary node is fully removed, its neighbor becomes the new
  // boundary row; mask at least one spatial block on each side
  mask_ends(diff1, std::max<Eigen::Index>(p, n), std::max<Eigen::Index>(q, n));

  // midpoint side: decomposition with the Dirichlet-form Laplacian and
  // midpoint-averaged samples
  std::vector<Matrix> pot2m(nt - 1);
  for (int k = 0; k + 1 < nt; ++k) {
    const Matrix a_mid = path.a_minus.entries() +
                         0.5 * (path.b_samples[k] + path.b_samples[k + 1]);
    const Matrix bp_mid =
        0.5 * (path.b_prime_samples[k] + path.b_prime_samples[k + 1]);
    pot2m[k] = a_mid * a_mid + bp_mid;
  }
  const Matrix ref2 =
      detail::kron_time_spatial(detail::laplacian_mid(nt, h), n) +
      detail::block_diagonal(pot2m);
  Matrix diff2 = model.h2.entries() - ref2;
  mask_ends(diff2, n, n);

  const double r1 = diff1.norm() / model.h1.entries().norm();
  const double r2 = diff2.norm() / model.h2.entries().norm();
  return std::max(r1, r2);
}

struct ResolventDiffTrace {
  Complex direct;            // tr((H2-z)^{-1} - (H1-z)^{-1}), eigenvalue sums
  Complex factorized;        // -tr(R_{G1} [2 B'] R_{G2}) on the sampled
                             // decomposition pair (exact identity there)
  double relative_residual;  // |tr(R_{G2}-R_{G1}) - factorized| / max(1, |.|)
  double sampled_residual;   // |direct - factorized| / max(1, |direct|);
                             // gap between the exact singular pair (whose
                             // trace is purely near-kernel) and the
                             // decomposition pair (which carries the
                             // scattering-phase content); O(1) diagnostic
};

inline Complex resolvent_trace_from_spectrum(const SpectralDecomposition& sd,
                                             Complex z) {
  Complex acc(0.0, 0.0);
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    acc += 1.0 / (sd.eigenvalues[k] - z);
  return acc;
}

// tr((H2 - z)^{-1} - (H1 - z)^{-1}) with the factorized cross-check of the
// resolvent-difference identity on the sampled decomposition pair.
inline ResolventDiffTrace resolvent_diff_trace(const ModelDiscretization& model,
                                               const OperatorPath& path,
                                               Complex z) {
  ResolventDiffTrace out;
  out.direct = resolvent_trace_from_spectrum(model.h2_eig, z) -
               resolvent_trace_from_spectrum(model.h1_eig, z);

  const auto [g1, g2] = detail::decomposition_pair(path);
  const Eigen::Index dim = g1.rows();
  const Matrix id = Matrix::Identity(dim, dim);
  Eigen::PartialPivLU<Matrix> lu1(g1 - z * id);
  Eigen::PartialPivLU<Matrix> lu2(g2 - z * id);
  const Matrix r2 = lu2.solve(id);
  const Matrix bp2 = 2.0 * detail::block_diagonal(path.b_prime_samples);
  out.factorized = -(lu1.solve(bp2 * r2)).trace();
  const Complex g_direct = r2.trace() - lu1.solve(id).trace();
  out.relative_residual =
      std::abs(g_direct - out.factorized) / std::max(1.0, std::abs(g_direct));
  out.sampled_residual =
      std::abs(out.direct - out.factorized) / std::max(1.0, std::abs(out.direct));
  return out;
}

struct DeltaRCurve {
  std::vector<double> lambdas;  // negative, ascending toward 0
  std::vector<double> values;   // Delta_r(lambda)
  double window_lo = 0.0;       // |lambda| plateau window, 0 when empty
  double window_hi = 0.0;
  double plateau_value = 0.0;
  bool has_plateau = false;
};

// Delta_r(lambda) = (-lambda) tr((H1 - lambda)^{-1} - (H2 - lambda)^{-1}).
inline std::vector<double> delta_r_samples(const ModelDiscretization& model,
                                           const std::vector<double>& lambdas) {
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) {
    if (lam >= 0.0) throw ValidationError("delta_r: lambda must be negative");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < model.h1_eig.eigenvalues.size(); ++k)
      acc += 1.0 / (model.h1_eig.eigenvalues[k] - lam);
    for (Eigen::Index k = 0; k < model.h2_eig.eigenvalues.size(); ++k)
      acc -= 1.0 / (model.h2_eig.eigenvalues[k] - lam);
    out.push_back(-lam * acc);
  }
  return out;
}

// Plateau window: the continuum value lives between the discretization's
// infrared cutoff and the spectral gap.  Lambda_lo from the exponential-tail
// estimate (or the grid scale when an asymptote is singular); Lambda_hi where
// the log-log slope first flattens below 0.05.
inline DeltaRCurve delta_r_curve(const ModelDiscretization& model,
                                 const OperatorPath& path,
                                 const std::vector<double>& lambdas) {
  DeltaRCurve curve;
  curve.lambdas = lambdas;
  curve.values = delta_r_samples(model, lambdas);

  const auto sm = eig(path.a_minus).eigenvalues;
  const auto sp = eig(path.a_plus()).eigenvalues;
  double kappa = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < sm.size(); ++k)
    kappa = std::min(kappa, std::abs(sm[k]));
  for (Eigen::Index k = 0; k < sp.size(); ++k)
    kappa = std::min(kappa, std::abs(sp[k]));
  const double infrared = std::pow(kPi / (2.0 * model.t_half), 2);
  double floor_scale;
  if (kappa > 1e-8) {
    const double tail = std::exp(-2.0 * kappa * model.t_half);
    floor_scale = tail * tail;  // squared exponential-tail estimate
    floor_scale = std::max(floor_scale, 1e-300);
  } else {
    floor_scale = infrared;
  }
  curve.window_lo = 10.0 * floor_scale;

  // scan from small |lambda| upward for the first flat log-log slope
  for (size_t i = curve.lambdas.size(); i-- > 1;) {
    const double l1 = -curve.lambdas[i], l0 = -curve.lambdas[i - 1];
    const double v1 = std::abs(curve.values[i]), v0 = std::abs(curve.values[i - 1]);
    if (l1 < curve.window_lo || v1 <= 0.0 || v0 <= 0.0) continue;
    const double slope =
        (std::log(v0) - std::log(v1)) / (std::log(l0) - std::log(l1));
    if (std::abs(slope) < 0.05) {
      if (!curve.has_plateau) {
        curve.has_plateau = true;
        curve.window_hi = l1;
        curve.plateau_value = curve.values[i];
      } else {
        curve.window_hi = l0;
      }
    } else if (curve.has_plateau) {
      break;
    }
  }
  return curve;
}

// #{eig(H1) < threshold} - #{eig(H2) < threshold}; demands a factor-10
// spectral gap at the threshold so the near-zero cluster is unambiguous.
inline int near_kernel_index(const ModelDiscretization& model, double threshold) {
  if (threshold <= 0) throw ValidationError("near_kernel_index: threshold <= 0");
  auto count = [&](const SpectralDecomposition& sd) {
    int c = 0;
    double below = 0.0, above = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
      const double mu = std::abs(sd.eigenvalues[k]);
      if (mu < threshold) {
        ++c;
        below = std::max(below, mu);
      } else {
        above = std::min(above, mu);
      }
    }
    if (below > 0.0 && above < 10.0 * below)
      throw NumericalError(
          "near_kernel_index: no spectral gap at threshold; nearest "
          "eigenvalues " + std::to_string(below) + " and " + std::to_string(above));
    return c;
  };
  return count(model.h1_eig) - count(model.h2_eig);
}

// Counting xi for the pair (H2, H1); vanishes for lambda < 0 by positivity.
inline SSFCurve ssf_H_pair(const ModelDiscretization& model,
                           const std::vector<double>& grid) {
  std::vector<std::pair<double, int>> events;
  for (Eigen::Index k = 0; k < model.h1_eig.eigenvalues.size(); ++k)
    events.emplace_back(model.h1_eig.eigenvalues[k], +1);
  for (Eigen::Index k = 0; k < model.h2_eig.eigenvalues.size(); ++k)
    events.emplace_back(model.h2_eig.eigenvalues[k], -1);
  std::sort(events.begin(), events.end());
  SSFCurve curve;
  curve.normalization = Normalization::ZeroBelowSpectrum;
  double level = 0.0;
  curve.levels.push_back(level);
  for (size_t k = 0; k < events.size(); ++k) {
    level += events[k].second;
    if (k + 1 < events.size() && events[k + 1].first == events[k].first) continue;
    curve.knots.push_back(events[k].first);
    curve.levels.push_back(level);
  }
  curve.grid = grid;
  for (double x : grid) curve.values.push_back(curve.eval(x));
  return curve;
}

// ---------------------------------------------------------------------------
// Hypothesis diagnostics.
// ---------------------------------------------------------------------------

struct HypothesisReport {
  double integral_bprime_opnorm = 0.0;   // int ||B'(t)|| dt
  double sup_bprime_opnorm = 0.0;        // sup_t ||B'(t)||
  double hs_bplus_resolvent = 0.0;       // || |B_+|^{1/2} (A_- - z0)^{-1} ||_2
  double hs_bprime_h0_resolvent = 0.0;   // || |B'|^{1/2} (H0 - z0)^{-1} ||_2
  double relative_bound_aprime = 0.0;    // || A_- B (H0 - iy)^{-1} || at y = 10||H0||
  std::vector<std::pair<int, double>> integral_bn_prime_trace;  // per n
  bool pass_b1_integrable = false;
  bool pass_bprime_bounded = false;
  bool pass_hs_bplus = false;
  bool pass_hs_bprime_h0 = false;
  bool pass_relative_bound = false;  // a' < 1
  bool pass_bn_prime_trace = false;
  bool all_pass() const {
    return pass_b1_integrable && pass_bprime_bounded && pass_hs_bplus &&
           pass_hs_bprime_h0 && pass_relative_bound && pass_bn_prime_trace;
  }
};

inline HypothesisReport verify_hypotheses(
    const OperatorPath& path, const ModelDiscretization& model, Complex z0,
    const std::vector<int>& n_values = {1, 2, 4, 8, 16, 32, 64}) {
  HypothesisReport rep;
  std::vector<double> opnorms(path.nt());
  for (size_t k = 0; k < path.nt(); ++k)
    opnorms[k] = operator_norm(path.b_prime_samples[k]);
  rep.integral_bprime_opnorm = trapezoid(path.t_grid, opnorms);
  rep.sup_bprime_opnorm = *std::max_element(opnorms.begin(), opnorms.end());

  const SignedSqrt bp = signed_sqrt(path.b_samples.back());
  rep.hs_bplus_resolvent = (bp.sqrt_abs * resolvent(path.a_minus, z0)).norm();

  // block-assembled |B'|^{1/2} against the H0 resolvent
  std::vector<Matrix> abs_sqrt_blocks(path.nt());
  for (size_t k = 0; k < path.nt(); ++k)
    abs_sqrt_blocks[k] = signed_sqrt(path.b_prime_samples[k]).sqrt_abs;
  const Matrix bp_half = detail::block_diagonal(abs_sqrt_blocks);
  rep.hs_bprime_h0_resolvent = (bp_half * resolvent(model.h0, z0)).norm();

  const Matrix am_bold = detail::block_diagonal(
      std::vector<Matrix>(path.nt(), path.a_minus.entries()));
  const Matrix b_bold = detail::block_diagonal(path.b_samples);
  const double y = 10.0 * std::max(std::abs(model.h0.entries().norm()), 1.0);
  rep.relative_bound_aprime =
      operator_norm(am_bold * b_bold * resolvent(model.h0, Complex(0.0, y)));

  for (int n : n_values) {
    const Matrix chi = apply_function(
        path.a_minus, [n](double nu) { return Complex(chi_n(nu, n), 0.0); });
    std::vector<double> trn(path.nt());
    for (size_t k = 0; k < path.nt(); ++k)
      trn[k] = trace_norm(chi * path.b_prime_samples[k] * chi);
    rep.integral_bn_prime_trace.emplace_back(n, trapezoid(path.t_grid, trn));
  }

  auto finite = [](double v) { return std::isfinite(v); };
  rep.pass_b1_integrable = finite(rep.integral_bprime_opnorm);
  rep.pass_bprime_bounded = finite(rep.sup_bprime_opnorm);
  rep.pass_hs_bplus = finite(rep.hs_bplus_resolvent);
  rep.pass_hs_bprime_h0 = finite(rep.hs_bprime_h0_resolvent);
  rep.pass_relative_bound = rep.relative_bound_aprime < 1.0;
  rep.pass_bn_prime_trace = true;
  for (const auto& [n, v] : rep.integral_bn_prime_trace)
    rep.pass_bn_prime_trace = rep.pass_bn_prime_trace && finite(v);
  return rep;
}

// ---------------------------------------------------------------------------
// Bold (time x space) convergence tables over the cutoff index n, computed on
// the sampled decomposition pair (same node space for every n).
// ---------------------------------------------------------------------------

struct BoldConvergenceRow {
  int n;
  double trace_norm_distance;  // ||[R2n - R1n] - [R2 - R1]||_1
  double hs_distance_j1;       // ||Bn' R1n - B' R1||_2
  double hs_distance_j2;       // ||Bn' R2n - B' R2||_2
};

inline std::vector<BoldConvergenceRow> bold_convergence_table(
    const OperatorPath& path, const std::vector<int>& n_values, Complex z) {
  const auto [g1, g2] = detail::decomposition_pair(path);
  const Eigen::Index dim = g1.rows();
  const Matrix id = Matrix::Identity(dim, dim);
  const Matrix r1 = Eigen::PartialPivLU<Matrix>(g1 - z * id).solve(id);
  const Matrix r2 = Eigen::PartialPivLU<Matrix>(g2 - z * id).solve(id);
  const Matrix bp_bold = detail::block_diagonal(path.b_prime_samples);
  const Matrix ref_diff = r2 - r1;

  std::vector<BoldConvergenceRow> rows;
  rows.reserve(n_values.size());
  for (int n : n_values) {
    const OperatorPath pn = apply_cutoff(path, n);
    const auto [g1n, g2n] = detail::decomposition_pair(pn);
    const Matrix r1n = Eigen::PartialPivLU<Matrix>(g1n - z * id).solve(id);
    const Matrix r2n = Eigen::PartialPivLU<Matrix>(g2n - z * id).solve(id);
    const Matrix bpn_bold = detail::block_diagonal(pn.b_prime_samples);
    BoldConvergenceRow row;
    row.n = n;
    row.trace_norm_distance = trace_norm((r2n - r1n) - ref_diff);
    row.hs_distance_j1 = (bpn_bold * r1n - bp_bold * r1).norm();
    row.hs_distance_j2 = (bpn_bold * r2n - bp_bold * r2).norm();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace witten
