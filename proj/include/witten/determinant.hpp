#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <functional>
#include <vector>

#include "witten/linalg.hpp"

namespace witten {

// (A0, A = A0 + B). Stores the perturbation explicitly so the split does not
// drift from the endpoints.
struct OperatorPair {
  HermitianOperator base;       // A0
  HermitianOperator perturbed;  // A
  Matrix perturbation;          // B, Hermitian

  OperatorPair(HermitianOperator a0, HermitianOperator a)
      : base(std::move(a0)),
        perturbed(std::move(a)),
        perturbation(perturbed.entries() - base.entries()) {
    if (base.dim() != perturbed.dim())
      throw ValidationError("OperatorPair: dimension mismatch");
  }

  OperatorPair(HermitianOperator a0, const Matrix& b)
      : OperatorPair(a0, HermitianOperator(a0.entries() + b)) {}

  int dim() const { return base.dim(); }
};

// det2(I - A) = prod (1 - lambda_n) e^{lambda_n} over the eigenvalues of A.
inline Complex det2_one_minus(const Matrix& a) {
  if (!all_finite(a)) throw ValidationError("det2_one_minus: non-finite entries");
  Eigen::ComplexEigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("det2_one_minus: eigensolver failure");
  Complex prod(1.0, 0.0);
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const Complex lam = solver.eigenvalues()[k];
    prod *= (1.0 - lam) * std::exp(lam);
  }
  return prod;
}

// Same quantity through det((I - A) exp(A)); cross-validation route.
inline Complex det2_one_minus_direct(const Matrix& a) {
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix ea = a.exp();
  return ((id - a) * ea).determinant();
}

// det2(I + M) via LU; exact in finite dimension and cheap for large kernels.
inline Complex det2_plus_lu(const Matrix& m) {
  const Matrix id = Matrix::Identity(m.rows(), m.cols());
  return (id + m).determinant() * std::exp(-m.trace());
}

// D_{A/A0}(z) = det(I + B (A0 - z)^{-1}).
inline Complex perturbation_determinant(const OperatorPair& pair, Complex z) {
  const Matrix r0 = resolvent(pair.base, z);
  const Matrix id = Matrix::Identity(pair.dim(), pair.dim());
  return (id + pair.perturbation * r0).determinant();
}

// Cayley-transform modified determinant
//   det((A - z)(A - conj(z0))^{-1} (A0 - conj(z0))(A0 - z)^{-1}),  Im z0 > 0.
inline Complex cayley_modified_determinant(const OperatorPair& pair, Complex z,
                                           Complex z0) {
  if (z0.imag() <= 0)
    throw ValidationError("cayley_modified_determinant: Im z0 must be > 0");
  const Complex z0bar = std::conj(z0);
  const Matrix id = Matrix::Identity(pair.dim(), pair.dim());
  const Matrix m = (pair.perturbed.entries() - z * id) *
                   resolvent(pair.perturbed, z0bar) *
                   (pair.base.entries() - z0bar * id) * resolvent(pair.base, z);
  return m.determinant();
}

// det2(I + sgn(B)|B|^{1/2} (A0 - z)^{-1} |B|^{1/2}), sgn(0) = 0.
inline Complex symmetrized_det2(const OperatorPair& pair, Complex z) {
  const SignedSqrt s = signed_sqrt(pair.perturbation);
  const Matrix sandwiched =
      s.sign * s.sqrt_abs * resolvent(pair.base, z) * s.sqrt_abs;
  return det2_one_minus(-sandwiched);
}

// Log-determinant samples with the imaginary part unwound continuously.
struct LogDetBranch {
  std::vector<double> parameters;
  std::vector<Complex> values;  // log D with continuous Im part
};

// Unwinds Im log along the grid. values[0] uses the principal branch. A step
// whose wrapped argument increment reaches pi means the grid cannot resolve
// the winding; the caller must refine (no auto-refinement here).
inline LogDetBranch track_log_branch(
    const std::vector<double>& params,
    const std::function<Complex(double)>& evaluator) {
  LogDetBranch branch;
  branch.parameters = params;
  branch.values.reserve(params.size());
  Complex prev(0.0, 0.0);
  double phase = 0.0;
  for (size_t k = 0; k < params.size(); ++k) {
    const Complex d = evaluator(params[k]);
    if (d == Complex(0.0, 0.0) || std::abs(d) == 0.0)
      throw NumericalError("track_log_branch: determinant vanishes at parameter " +
                           std::to_string(params[k]));
    if (k == 0) {
      phase = std::arg(d);
    } else {
      const double step = std::arg(d / prev);
      if (std::abs(step) >= kPi * (1.0 - 1e-9))
        throw NumericalError(
            "track_log_branch: argument gap >= pi on [" +
            std::to_string(params[k - 1]) + ", " + std::to_string(params[k]) +
            "], refine the grid");
      phase += step;
    }
    branch.values.emplace_back(std::log(std::abs(d)), phase);
    prev = d;
  }
  return branch;
}

}  // namespace witten
