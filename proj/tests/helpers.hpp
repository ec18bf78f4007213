#pragma once

#include <random>

#include "witten/determinant.hpp"
#include "witten/linalg.hpp"

namespace testutil {

using witten::Complex;
using witten::Matrix;

// deterministic Hermitian matrix with entries O(1)
inline Matrix random_hermitian(int dim, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = Complex(dist(rng), dist(rng));
  return 0.5 * (m + m.adjoint().eval());
}

inline Matrix random_complex(int dim, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = Complex(dist(rng), dist(rng));
  return m;
}

inline witten::OperatorPair random_pair(int dim, std::mt19937& rng,
                                        double base_scale = 1.0,
                                        double pert_scale = 0.5) {
  const Matrix a0 = random_hermitian(dim, rng, base_scale);
  const Matrix b = random_hermitian(dim, rng, pert_scale);
  return witten::OperatorPair(witten::HermitianOperator(a0), b);
}

}  // namespace testutil
