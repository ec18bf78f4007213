#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace witten {

using Complex = std::complex<double>;

// Error categories; the CLI maps these onto exit codes.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Singularities, failed branch tracking, non-convergent limits.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense-solver dimension caps and similar resource limits.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

// dim(model) = N_t * n_spatial cap for dense eigensolves.
inline constexpr int kDenseDimBudget = 6000;

}  // namespace witten
