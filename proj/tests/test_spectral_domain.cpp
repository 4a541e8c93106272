#include <doctest.h>

#include <cmath>

#include "cgm/errors.hpp"
#include "cgm/spectral_domain.hpp"

using namespace cgm;

TEST_CASE("dirichlet modes") {
  const auto one = dirichlet_modes_1d(1, 0.0);
  CHECK(one.modes[0].lambda2 == kPi * kPi);
  CHECK(one.modes[0].mu2 == kPi * kPi);
  CHECK(one.first_positive == 1);

  const auto shifted = dirichlet_modes_1d(5, 1.0);
  for (const auto& m : shifted.modes) CHECK(m.mu2 == doctest::Approx(m.n * m.n * kPi * kPi - 1.0));

  CHECK(dirichlet_modes_1d(5, 20.0).first_positive == 2);
  CHECK_FALSE(dirichlet_modes_1d(1, 20.0).first_positive.has_value());
  CHECK_THROWS_AS(dirichlet_modes_1d(0, 0.0), InvalidArgument);
}

TEST_CASE("outward normal traces") {
  for (int n = 1; n <= 6; ++n) {
    const Mode m = make_mode(n, 0.0);
    const double h = 1e-6;
    // one-sided derivative of sqrt(2) sin(n pi x), outward normal
    const double d0 = -(eigenfunction(n, h) - eigenfunction(n, 0.0)) / h;
    const double d1 = (eigenfunction(n, 1.0) - eigenfunction(n, 1.0 - h)) / h;
    CHECK(m.traces[0] == doctest::Approx(d0).epsilon(1e-4));
    CHECK(m.traces[1] == doctest::Approx(d1).epsilon(1e-4));
  }
}

TEST_CASE("trace pairing") {
  const auto g = TimeGrid::make(1.0, 10);
  const auto z = SampledFunction::zeros(g);
  const auto one = SampledFunction::constant(g, 1.0);
  CHECK(trace_pairing(make_mode(3, 0.0), BoundaryControl(z, z)).sup_norm() == 0.0);

  const auto left = BoundaryControl::single(0, one);
  const auto g1 = trace_pairing(make_mode(1, 0.0), left);
  for (double v : g1.values()) CHECK(v == doctest::Approx(-std::sqrt(2.0) * kPi));

  const auto right = BoundaryControl::single(1, one);
  for (int n = 1; n < 6; ++n) {
    const double a = trace_pairing(make_mode(n, 0.0), right)[5];
    const double b = trace_pairing(make_mode(n + 1, 0.0), right)[5];
    CHECK(a * b < 0.0);
  }
}

TEST_CASE("boundary control invariants") {
  const auto g = TimeGrid::make(1.0, 10);
  const auto one = SampledFunction::constant(g, 1.0);
  CHECK_THROWS_AS(BoundaryControl(one, one, {true, false}), InvalidArgument);
  CHECK_THROWS_AS(BoundaryControl::single(2, one), InvalidArgument);
  CHECK(BoundaryControl(one, one).l2_norm_squared() == doctest::Approx(2.0));
  CHECK(BoundaryControl::zero(g).l2_norm_squared() == 0.0);
  CHECK_THROWS_AS(BoundaryControl(one, SampledFunction::constant(TimeGrid::make(1.0, 10), 0.0)), GridMismatch);
}

TEST_CASE("trace bound is four for every mode") {
  const auto set = dirichlet_modes_1d(50, 0.0);
  const auto b = trace_bound_check(set.modes);
  CHECK(b.lower == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(b.upper == doctest::Approx(4.0).epsilon(1e-14));
  for (double v : b.per_mode) CHECK(v > 0.0);
  CHECK_THROWS_AS(trace_bound_check({}), InvalidArgument);
}

TEST_CASE("eigenfunctions are orthonormal and satisfy the eigen equation") {
  const int K = 4000;
  for (int n = 1; n <= 20; ++n) {
    for (int m = n; m <= 20; ++m) {
      // composite trapezoid is exact for these trigonometric products at K > n + m
      double s = 0.0;
      for (int i = 1; i < K; ++i) {
        const double x = static_cast<double>(i) / K;
        s += eigenfunction(n, x) * eigenfunction(m, x);
      }
      s /= K;
      CHECK(s == doctest::Approx(n == m ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
    }
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double x = i / 100.0;
      worst = std::max(worst, std::abs(eigenfunction_d2(n, x) + n * n * kPi * kPi * eigenfunction(n, x)));
    }
    CHECK(worst <= 1e-9 * n * n);
  }
}
