#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "witten/common.hpp"

namespace witten {

using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) {
  return m.allFinite();
}

// Dense finite-dimensional self-adjoint operator. Hermiticity is checked on
// construction up to 1e-12 relative in the max norm and the stored matrix is
// symmetrized so downstream spectral calls see an exactly Hermitian input.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries) {
    if (entries.rows() != entries.cols())
      throw ValidationError("HermitianOperator: matrix not square");
    if (!all_finite(entries))
      throw ValidationError("HermitianOperator: non-finite entries");
    const double scale = entries.cwiseAbs().maxCoeff();
    const double defect = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * std::max(1.0, scale))
      throw ValidationError("HermitianOperator: hermiticity defect " +
                            std::to_string(defect));
    entries_ = 0.5 * (entries + entries.adjoint().eval());
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns orthonormal
};

inline SpectralDecomposition eig(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.entries());
  if (solver.info() != Eigen::Success)
    throw NumericalError("eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// V diag(f(lambda)) V*. f must be finite at every eigenvalue.
inline Matrix apply_function(const HermitianOperator& h,
                             const std::function<Complex(double)>& f) {
  const auto sd = eig(h);
  Eigen::VectorXcd fl(sd.eigenvalues.size());
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    const Complex v = f(sd.eigenvalues[k]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("apply_function: f singular at eigenvalue " +
                           std::to_string(sd.eigenvalues[k]));
    fl[k] = v;
  }
  return sd.eigenvectors * fl.asDiagonal() * sd.eigenvectors.adjoint();
}

inline double spectral_gap(const HermitianOperator& h, Complex z) {
  const auto sd = eig(h);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    gap = std::min(gap, std::abs(Complex(sd.eigenvalues[k], 0.0) - z));
  return gap;
}

// (H - z I)^{-1}. Refuses z within 1e-12 of the spectrum relative to the
// spectral radius; below that, determinant phases are meaningless.
inline Matrix resolvent(const HermitianOperator& h, Complex z) {
  const auto sd = eig(h);
  const double radius =
      std::max(std::abs(sd.eigenvalues[0]),
               std::abs(sd.eigenvalues[sd.eigenvalues.size() - 1]));
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    gap = std::min(gap, std::abs(Complex(sd.eigenvalues[k], 0.0) - z));
  if (gap <= 1e-12 * std::max(1.0, radius))
    throw NumericalError("resolvent: z within " + std::to_string(gap) +
                         " of the spectrum");
  Eigen::VectorXcd rl(sd.eigenvalues.size());
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    rl[k] = 1.0 / (Complex(sd.eigenvalues[k], 0.0) - z);
  return sd.eigenvectors * rl.asDiagonal() * sd.eigenvectors.adjoint();
}

inline Complex trace(const Matrix& m) { return m.trace(); }

// p in {1, 2, inf}: sum of singular values, Frobenius, largest singular value.
inline double schatten_norm(const Matrix& m, double p) {
  if (!all_finite(m)) throw ValidationError("schatten_norm: non-finite entries");
  if (p == 2.0) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (std::isinf(p)) return sv.size() ? sv[0] : 0.0;
  if (p == 1.0) return sv.sum();
  throw ValidationError("schatten_norm: p must be 1, 2 or inf");
}

inline double trace_norm(const Matrix& m) { return schatten_norm(m, 1.0); }
inline double operator_norm(const Matrix& m) {
  return schatten_norm(m, std::numeric_limits<double>::infinity());
}

// Spectral split B = sgn(B) |B|^{1/2} . |B|^{1/2} with sgn(0) = 0.
struct SignedSqrt {
  Matrix sign;       // sgn(B)
  Matrix sqrt_abs;   // |B|^{1/2}
};

inline SignedSqrt signed_sqrt(const Matrix& b_hermitian) {
  HermitianOperator b(b_hermitian);
  const auto sd = eig(b);
  Eigen::VectorXcd sg(sd.eigenvalues.size()), rt(sd.eigenvalues.size());
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    const double lam = sd.eigenvalues[k];
    sg[k] = lam > 0 ? 1.0 : (lam < 0 ? -1.0 : 0.0);
    rt[k] = std::sqrt(std::abs(lam));
  }
  return {sd.eigenvectors * sg.asDiagonal() * sd.eigenvectors.adjoint(),
          sd.eigenvectors * rt.asDiagonal() * sd.eigenvectors.adjoint()};
}

}  // namespace witten
