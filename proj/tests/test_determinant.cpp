#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "witten/determinant.hpp"

using namespace witten;

TEST_CASE("det2 product formula matches det((I-A)e^A)") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testutil::random_complex(6, rng, 0.4);
    const Complex p = det2_one_minus(a);
    const Complex d = det2_one_minus_direct(a);
    CHECK(std::abs(p - d) < 1e-10 * std::max(1.0, std::abs(p)));
  }
}

TEST_CASE("det2 multiplicativity with the e^{-tr(AB)} correction") {
  std::mt19937 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testutil::random_complex(5, rng, 0.3);
    const Matrix b = testutil::random_complex(5, rng, 0.3);
    const Matrix c = a + b - a * b;  // I - C = (I - A)(I - B)
    const Complex lhs = det2_one_minus(c);
    const Complex rhs =
        det2_one_minus(a) * det2_one_minus(b) * std::exp(-(a * b).trace());
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("det2_plus_lu agrees with the product formula") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = testutil::random_complex(7, rng, 0.4);
    const Complex lu = det2_plus_lu(m);
    const Complex prod = det2_one_minus(-m);
    CHECK(std::abs(lu - prod) < 1e-10 * std::max(1.0, std::abs(lu)));
  }
}

TEST_CASE("perturbation determinant equals the spectral product ratio") {
  std::mt19937 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const OperatorPair pair = testutil::random_pair(6, rng);
    const Complex z(0.37, 0.81);
    const Complex d = perturbation_determinant(pair, z);
    const auto s0 = eig(pair.base).eigenvalues;
    const auto s1 = eig(pair.perturbed).eigenvalues;
    Complex ratio(1.0, 0.0);
    for (Eigen::Index k = 0; k < s0.size(); ++k)
      ratio *= (s1[k] - z) / (s0[k] - z);
    CHECK(std::abs(d - ratio) < 1e-10 * std::max(1.0, std::abs(d)));
  }
}

TEST_CASE("Cayley modified determinant: normalization point and ratio") {
  std::mt19937 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const OperatorPair pair = testutil::random_pair(5, rng);
    const Complex z0(0.2, 1.1);
    CHECK(std::abs(cayley_modified_determinant(pair, std::conj(z0), z0) -
                   Complex(1.0, 0.0)) < 1e-12);

    const Complex z(-0.7, 0.5);
    const Complex ratio = perturbation_determinant(pair, z) /
                          perturbation_determinant(pair, std::conj(z0));
    const Complex dt = cayley_modified_determinant(pair, z, z0);
    CHECK(std::abs(dt - ratio) < 1e-10 * std::max(1.0, std::abs(dt)));
  }
  std::mt19937 rng2(26);
  const OperatorPair pair = testutil::random_pair(4, rng2);
  CHECK_THROWS_AS(cayley_modified_determinant(pair, Complex(0, 1),
                                              Complex(0.0, -0.5)),
                  ValidationError);
}

TEST_CASE("symmetrized det2 equals D(z) e^{-tr(B R0(z))}") {
  std::mt19937 rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    const OperatorPair pair = testutil::random_pair(6, rng);
    const Complex z(0.11, 0.93);
    const Complex lhs = symmetrized_det2(pair, z);
    const Complex rhs =
        perturbation_determinant(pair, z) *
        std::exp(-(pair.perturbation * resolvent(pair.base, z)).trace());
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("branch tracking unwinds multiple windings") {
  // evaluator winds through 3 full turns; principal args alone cannot
  std::vector<double> params;
  for (int k = 0; k <= 200; ++k) params.push_back(k / 200.0);
  auto evaluator = [](double p) {
    return std::exp(Complex(0.0, 6.0 * kPi * p));
  };
  const LogDetBranch branch = track_log_branch(params, evaluator);
  CHECK(branch.values.back().imag() == doctest::Approx(6.0 * kPi).epsilon(1e-10));
  for (size_t k = 0; k < params.size(); ++k)
    CHECK(branch.values[k].imag() ==
          doctest::Approx(6.0 * kPi * params[k]).epsilon(1e-9));
}

TEST_CASE("branch tracking refuses unresolvable grids and zeros") {
  // consecutive samples exactly out of phase: the winding is ambiguous
  auto fast = [](double p) { return std::exp(Complex(0.0, kPi * p)); };
  CHECK_THROWS_AS(track_log_branch({0.0, 1.0, 2.0}, fast), NumericalError);

  auto vanishing = [](double p) { return Complex(p - 0.5, 0.0); };
  CHECK_THROWS_AS(track_log_branch({0.0, 0.5, 1.0}, vanishing), NumericalError);
}
