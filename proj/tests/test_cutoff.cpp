#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "witten/cutoff.hpp"

using namespace witten;

TEST_CASE("cutoff functions: values, limits, and the s = 1 - 1/n^2 relation") {
  CHECK(chi_n(0.0, 3) == doctest::Approx(1.0));
  CHECK(chi_n(4.0, 3) == doctest::Approx(3.0 / 5.0));
  CHECK(chi_tilde(2.0, 1.0) == doctest::Approx(1.0));  // s = 1 is the identity

  for (double nu : {-7.3, -0.2, 0.0, 1.4, 12.0})
    for (int n : {1, 2, 5, 11})
      CHECK(chi_n(nu, n) ==
            doctest::Approx(chi_tilde(nu, 1.0 - 1.0 / (double(n) * n)))
                .epsilon(1e-14));

  // even, decreasing in |nu|, -> 1 pointwise as n grows
  CHECK(chi_n(2.5, 4) == chi_n(-2.5, 4));
  CHECK(chi_n(3.0, 4) < chi_n(1.0, 4));
  CHECK(chi_n(5.0, 100000) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("smoothed perturbation is Hermitian and contracts the trace norm") {
  std::mt19937 rng(41);
  const HermitianOperator a_minus(testutil::random_hermitian(8, rng, 2.0));
  const Matrix b = testutil::random_hermitian(8, rng);
  for (int n : {1, 4, 16}) {
    const Matrix bn = smoothed_perturbation(a_minus, b, n);
    CHECK((bn - bn.adjoint()).norm() < 1e-12);
    CHECK(trace_norm(bn) <= trace_norm(b) + 1e-10);
  }
  // n large: chi_n(A_-) ~ I and the smoothing disappears
  const Matrix b_inf = smoothed_perturbation(a_minus, b, 1e6);
  CHECK((b_inf - b).norm() < 1e-9 * b.norm());
}

TEST_CASE("cutoff family: approximants interpolate between damped and full") {
  std::mt19937 rng(42);
  const HermitianOperator a_minus(testutil::random_hermitian(6, rng, 3.0));
  const Matrix b = testutil::random_hermitian(6, rng);
  const std::vector<int> ns{1, 2, 4, 8, 16, 32, 64};
  const CutoffFamily family = build_cutoff_family(a_minus, b, ns);
  REQUIRE(family.approximants.size() == ns.size());

  // perturbations approach B monotonically in trace-norm distance
  double prev = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < ns.size(); ++k) {
    const double dist = trace_norm(family.approximants[k].perturbation - b);
    CHECK(dist < prev + 1e-12);
    prev = dist;
  }
  CHECK(prev < trace_norm(smoothed_perturbation(a_minus, b, 1) - b));

  CHECK_THROWS_AS(build_cutoff_family(a_minus, b, {0}), ValidationError);
  CHECK_THROWS_AS(
      build_cutoff_family(a_minus, Matrix::Zero(3, 3), {1}), ValidationError);
}

TEST_CASE("interpolation family endpoints: s=0 matches n=1, s=1 matches B") {
  std::mt19937 rng(43);
  const HermitianOperator a_minus(testutil::random_hermitian(5, rng, 2.0));
  const Matrix b = testutil::random_hermitian(5, rng);
  const auto fam = interpolation_family(a_minus, b, {0.0, 0.5, 1.0});
  CHECK((fam.front().perturbation - smoothed_perturbation(a_minus, b, 1)).norm() <
        1e-12);
  CHECK((fam.back().perturbation - b).norm() < 1e-12);
  CHECK_THROWS_AS(interpolation_family(a_minus, b, {1.2}), ValidationError);
}

TEST_CASE("resolvent trace distance vanishes iff the approximant is exact") {
  std::mt19937 rng(44);
  const HermitianOperator a_minus(testutil::random_hermitian(6, rng, 2.0));
  const Matrix b = testutil::random_hermitian(6, rng);
  const OperatorPair full(a_minus, b);
  CHECK(resolvent_trace_distance(full, full, Complex(0, 1)) <
        1e-12);
  const OperatorPair damped(a_minus, smoothed_perturbation(a_minus, b, 1));
  CHECK(resolvent_trace_distance(damped, full, Complex(0, 1)) > 1e-4);
}

TEST_CASE("convergence report: distances shrink, moments approach reference") {
  std::mt19937 rng(45);
  // spread base spectrum so chi_n actually bites at small n
  Matrix d = Matrix::Zero(8, 8);
  for (int k = 0; k < 8; ++k) d(k, k) = -10.0 + 20.0 * k / 7.0;
  const HermitianOperator a_minus(d);
  const Matrix b = testutil::random_hermitian(8, rng, 0.8);
  const std::vector<int> ns{1, 4, 16, 64};
  const CutoffFamily family = build_cutoff_family(a_minus, b, ns);
  const OperatorPair full(a_minus, b);
  const SSFCurve reference = ssf_counting(full, {});
  const auto rows = ssf_convergence_report(family, reference);
  REQUIRE(rows.size() == ns.size());

  CHECK(rows.back().distance_b1 < 0.2 * rows.front().distance_b1);
  CHECK(rows.back().distance_wl1 < 0.2 * rows.front().distance_wl1);

  // reference moment with the same weight
  double ref_moment = 0.0;
  for (size_t j = 0; j + 1 < reference.knots.size(); ++j)
    ref_moment += reference.levels[j + 1] *
                  (std::atan(reference.knots[j + 1]) - std::atan(reference.knots[j]));
  CHECK(std::abs(rows.back().moment - ref_moment) <
        std::abs(rows.front().moment - ref_moment));
}
