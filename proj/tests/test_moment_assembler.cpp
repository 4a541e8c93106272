#include <doctest.h>

#include <cmath>

#include "cgm/errors.hpp"
#include "cgm/memory_dynamics.hpp"
#include "cgm/moment_assembler.hpp"

using namespace cgm;

namespace {

std::vector<Mode> modes_from(int lo, int hi, double a) {
  std::vector<Mode> v;
  for (int n = lo; n <= hi; ++n) v.push_back(make_mode(n, a));
  return v;
}

BoundaryControl test_control(const GridPtr& g) {
  return BoundaryControl(SampledFunction::from(g, [](double t) { return std::sin(4 * t) + 0.5; }),
                         SampledFunction::from(g, [](double t) { return std::exp(-t) - t * t; }));
}

}  // namespace

TEST_CASE("free response d_n") {
  const auto g = TimeGrid::make(1.0, 1000);
  SUBCASE("memoryless") {
    const auto rt = resolvent_of(MemoryKernel::zero(), g);
    const Mode m = make_mode(1, 0.0);
    const auto H = SampledFunction::zeros(g);
    CHECK(rhs_d(m, rt, H, 2.0) == doctest::Approx(2.0 * std::exp(-m.mu2)).epsilon(1e-15));
    CHECK(rhs_d(m, rt, H, 0.0) == 0.0);
  }
  SUBCASE("constant memory approaches -R(T) / mu2") {
    const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
    const Mode m = make_mode(20, rt.a);
    const double scaled = m.mu2 * rhs_d(m, rt, H_direct(rt.L, m.mu2), 1.0);
    CHECK(scaled == doctest::Approx(-std::exp(-1.0)).epsilon(1e-3));
  }
}

TEST_CASE("asymptotic law of d_n") {
  const auto g = TimeGrid::make(1.0, 2000);
  SUBCASE("constant memory: bounded residuals") {
    const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
    const auto rep = dn_asymptotic_check(modes_from(1, 25, rt.a), rt);
    CHECK_FALSE(rep.memoryless);
    CHECK(rep.R_T == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK(rep.rows.size() == 25);
    CHECK(rep.sup_residual_scaled < 1.0);
    const auto N = scope_threshold(rep);
    REQUIRE(N.has_value());
    for (const auto& r : rep.rows)
      if (r.n >= *N) CHECK(std::abs(r.residual) < 0.5 * std::abs(rep.R_T));
  }
  SUBCASE("memoryless regime is flagged") {
    const auto rt = resolvent_of(MemoryKernel::zero(), g);
    const auto rep = dn_asymptotic_check(modes_from(1, 5, 0.0), rt);
    CHECK(rep.memoryless);
    for (const auto& r : rep.rows) CHECK(r.scaled == doctest::Approx(r.mu2 * std::exp(-r.mu2)).epsilon(1e-14));
    CHECK(rep.rows.back().scaled < 1e-100);
    CHECK(scope_threshold(rep) == 1);
  }
  SUBCASE("vanishing R(T) violates the hypothesis") {
    // M(t) = t has resolvent sin t, which vanishes at T = pi
    const auto gp = TimeGrid::make(kPi, 2000);
    const auto rt = resolvent_of(MemoryKernel::polynomial({0.0, 1.0}), gp);
    CHECK_THROWS_AS(dn_asymptotic_check(modes_from(1, 3, rt.a), rt), HypothesisViolation);
  }
  SUBCASE("modes with mu2 <= 0 are skipped") {
    const auto rt = resolvent_of(MemoryKernel::constant(20.0), TimeGrid::make(0.2, 1000));
    const auto rep = dn_asymptotic_check(modes_from(1, 4, rt.a), rt);
    CHECK(rep.rows.front().n == 2);
  }
}

TEST_CASE("diagonal map between initial data and targets round-trips") {
  const auto g = TimeGrid::make(1.0, 1000);
  const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
  const auto rep = dn_asymptotic_check(modes_from(3, 12, rt.a), rt);
  std::vector<double> xi;
  for (const auto& r : rep.rows) xi.push_back(1.0 / r.n);
  const auto c = rescaled_targets(rep, xi);
  const auto back = initial_data_for(rep, c);
  for (std::size_t i = 0; i < xi.size(); ++i) CHECK(back[i] == doctest::Approx(xi[i]).epsilon(1e-15));
  CHECK_THROWS_AS(rescaled_targets(rep, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("moment kernels") {
  const auto g = TimeGrid::make(1.0, 1000);
  SUBCASE("no memory correction") {
    const Mode m = make_mode(2, 0.0);
    const auto k = moment_kernels(m, SampledFunction::zeros(g));
    for (int e = 0; e < 2; ++e) {
      const auto expect = (m.mu2 * m.traces[e]) * e_k(g, m.mu2, 0);
      CHECK(sup_distance(k.profile(e), expect) == 0.0);
    }
  }
  SUBCASE("value at s = 0") {
    const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
    const Mode m = make_mode(3, rt.a);
    const auto k = moment_kernels(m, H_direct(rt.L, m.mu2));
    CHECK(k.profile(0).front() == doctest::Approx(m.mu2 * m.traces[0]));
    CHECK(k.profile(1).front() == doctest::Approx(m.mu2 * m.traces[1]));
  }
  SUBCASE("moment functional equals the controlled response") {
    for (const auto& M : {MemoryKernel::constant(1.0), MemoryKernel::exp_sum({{1.0, 1.0}})}) {
      const auto rt = resolvent_of(M, g);
      const auto f = test_control(g);
      for (int n = 1; n <= 8; ++n) {
        const Mode m = make_mode(n, rt.a);
        const auto H = H_direct(rt.L, m.mu2);
        const double pairing = moment_kernels(m, H).pair_control(f);
        const double wT = explicit_mode(m, rt, H, 0.0, trace_pairing(m, f)).w.back();
        CHECK(std::abs(pairing / m.mu2 + wT) <= 1e-6);
      }
    }
  }
}

TEST_CASE("moment problem assembly") {
  const auto g = TimeGrid::make(1.0, 1000);
  const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
  auto xi = [](int n) { return 1.0 / n; };
  const auto direct = build_moment_problem(modes_from(1, 6, rt.a), rt, xi);
  MomentOptions series_opts;
  series_opts.use_series = true;
  const auto series = build_moment_problem(modes_from(1, 6, rt.a), rt, xi, series_opts);
  CHECK_FALSE(direct.memoryless);
  CHECK(direct.T == 1.0);
  for (std::size_t i = 0; i < direct.entries.size(); ++i) {
    const auto& e = direct.entries[i];
    CHECK(e.d == doctest::Approx(series.entries[i].d).epsilon(1e-7));
    CHECK(e.d == doctest::Approx(rhs_d(e.mode, rt, e.H, e.xi)).epsilon(1e-15));
    CHECK(e.target() == doctest::Approx(e.mode.mu2 * e.d));
  }
  const auto rt20 = resolvent_of(MemoryKernel::constant(20.0), g);
  CHECK_THROWS_AS(build_moment_problem(modes_from(1, 2, rt20.a), rt20, xi), InvalidArgument);
}

TEST_CASE("scalar reduction through G") {
  const auto g = TimeGrid::make(1.0, 2000);
  const auto f = test_control(g);
  const BoundaryControl chi(f.at(0).reversed(), f.at(1).reversed());
  std::vector<BoundaryControl> family{chi};

  SUBCASE("zero G is the identity") {
    const auto G = G_kernel(SampledFunction::zeros(g), 1e-12);
    const auto red = reduce_scalar(family, G);
    CHECK(sup_distance(red[0].at(0), chi.at(0)) == 0.0);
    CHECK(sup_distance(red[0].at(1), chi.at(1)) == 0.0);

    const auto one = SampledFunction::constant(g, 1.0);
    std::vector<BoundaryControl> constant{BoundaryControl(one, one)};
    const Mode m = make_mode(3, 0.0);
    const auto psi = trace_sum(m, reduce_scalar(constant, G)[0]);
    for (double v : psi.values()) CHECK(v == doctest::Approx(m.traces[0] + m.traces[1]));
  }
  SUBCASE("constant memory: reduced pairing equals the moment pairing") {
    const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
    const auto G = G_kernel(rt.L, 1e-15);
    const auto red = reduce_scalar(family, G);
    for (int n = 1; n <= 6; ++n) {
      const Mode m = make_mode(n, rt.a);
      const auto k = moment_kernels(m, H_direct(rt.L, m.mu2));
      CHECK(std::abs(scalar_pairing(m, red[0]) - k.pair_profile(chi)) <= 1e-6);
    }
  }
  SUBCASE("grids must match") {
    const auto G = G_kernel(SampledFunction::zeros(TimeGrid::make(1.0, 600)), 1e-12);
    CHECK_THROWS_AS(reduce_scalar(family, G), GridMismatch);
  }
}
