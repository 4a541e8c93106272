#include <doctest.h>

#include <cmath>
#include <random>

#include "cgm/biorth_lab.hpp"
#include "cgm/errors.hpp"

using namespace cgm;

TEST_CASE("precision scope") {
  {
    PrecisionScope s(256);
    const mp_real x = 1;
    CHECK(precision_bits(x) >= 256);
    CHECK(precision_bits(x) < 256 + 8);
  }
  {
    PrecisionScope s(1024);
    CHECK(precision_bits(mp_real(3) / 7) >= 1024);
  }
  CHECK_THROWS_AS(PrecisionScope(20), InvalidArgument);
}

TEST_CASE("extended precision Cholesky") {
  PrecisionScope s(128);
  MpMatrix a(2);
  a(0, 0) = 4;
  a(0, 1) = a(1, 0) = 2;
  a(1, 1) = 3;
  const auto c = Cholesky::factor(a);
  REQUIRE(c.has_value());
  CHECK(static_cast<double>((a * c->inverse()).max_abs_diff(MpMatrix::identity(2))) < 1e-35);
  const auto x = c->solve({mp_real(2), mp_real(1)});
  CHECK(static_cast<double>(x[0]) == doctest::Approx(0.5));
  CHECK(static_cast<double>(x[1]) == doctest::Approx(0.0).scale(1.0));

  a(1, 1) = 1;  // determinant zero
  CHECK_FALSE(Cholesky::factor(a).has_value());
}

TEST_CASE("Gram matrices of exponentials") {
  const auto two = ExponentFamily::explicit_values({1.0, 2.0});
  const auto gs = gram(two, Horizon::infinite());
  PrecisionScope s(gs.bits);
  CHECK(gs.G(0, 0) == mp_real(1) / 2);
  CHECK(gs.G(0, 1) == mp_real(1) / 3);
  CHECK(gs.G(1, 0) == mp_real(1) / 3);
  CHECK(gs.G(1, 1) == mp_real(1) / 4);

  const auto one = gram(ExponentFamily::explicit_values({1.0}), Horizon::infinite());
  CHECK(one.G(0, 0) == mp_real(1) / 2);

  mp_real prev = 0;
  for (double T : {0.1, 0.5, 1.0, 5.0, 50.0}) {
    const auto gT = gram(two, Horizon::finite(T));
    CHECK(gT.G(0, 1) > prev);
    CHECK(gT.G(0, 1) < gs.G(0, 1));
    prev = gT.G(0, 1);
  }
  CHECK(static_cast<double>(gram(two, Horizon::finite(1.0)).G(0, 0)) == doctest::Approx(-std::expm1(-2.0) / 2));

  CHECK_THROWS_AS(gram(ExponentFamily::explicit_values({1.0, 1.0}), Horizon::infinite()), NumericalError);
  CHECK_THROWS_AS(gram(ExponentFamily::explicit_values({-1.0}), Horizon::infinite()), InvalidArgument);
  CHECK_THROWS_AS(Horizon::finite(0.0), InvalidArgument);
}

TEST_CASE("minimal biorthogonal norms") {
  SUBCASE("hand-inverted cases") {
    const auto r1 = min_norm_biorth(ExponentFamily::explicit_values({1.0}), Horizon::infinite());
    CHECK(r1.norm2[0] == doctest::Approx(2.0).epsilon(1e-15));
    const auto r2 = min_norm_biorth(ExponentFamily::explicit_values({1.0, 2.0}), Horizon::infinite());
    CHECK(r2.norm2[0] == doctest::Approx(18.0).epsilon(1e-15));
    CHECK(r2.norm2[1] == doctest::Approx(36.0).epsilon(1e-15));
    CHECK(r2.bits_used >= 256);
  }
  SUBCASE("Dirichlet family matches the Cauchy closed form") {
    const auto fam = ExponentFamily::dirichlet(20);
    const auto rep = min_norm_biorth(fam, Horizon::infinite());
    const auto exact = cauchy_diag(fam);
    for (std::size_t i = 0; i < exact.size(); ++i) CHECK(rep.norm2[i] == doctest::Approx(exact[i]).epsilon(1e-15));
    CHECK(rep.max_residual < 1e-20);
    for (double r : rep.residual) CHECK(r < 1e-20);
    CHECK(rep.log10_condition > 10.0);
  }
  SUBCASE("finite horizon norms dominate infinite horizon norms") {
    const auto fam = ExponentFamily::dirichlet(12);
    const auto inf = min_norm_biorth(fam, Horizon::infinite());
    const auto fin = min_norm_biorth(fam, Horizon::finite(1.0));
    const auto shrt = min_norm_biorth(fam, Horizon::finite(0.05));
    for (std::size_t i = 0; i < fam.size(); ++i) {
      CHECK(fin.norm2[i] >= inf.norm2[i]);
      CHECK(shrt.norm2[i] >= fin.norm2[i]);
    }
    MESSAGE(growth_fit(shrt, 1, 6).slope, " ", growth_fit(fin, 1, 6).slope, " ", growth_fit(inf, 1, 6).slope);
  }
  SUBCASE("precision exhaustion is reported with a condition estimate") {
    BiorthOptions o;
    o.bits = 64;
    o.max_bits = 128;
    try {
      min_norm_biorth(ExponentFamily::dirichlet(20), Horizon::infinite(), o);
      FAIL("expected PrecisionExhausted");
    } catch (const PrecisionExhausted& e) {
      CHECK(e.log10_condition() > 10.0);
    }
  }
  SUBCASE("escalation is recorded") {
    BiorthOptions o;
    o.bits = 64;
    const auto rep = min_norm_biorth(ExponentFamily::dirichlet(20), Horizon::infinite(), o);
    CHECK(rep.bits_used > 64);
    CHECK_FALSE(rep.warnings.empty());
  }
}

TEST_CASE("minimality against perturbations orthogonal to the span") {
  // Coordinates in e_1..e_{N+1}; psi_n uses only the first N, v = e_{N+1} - P e_{N+1}.
  const int N = 8;
  const auto fam = ExponentFamily::dirichlet(N + 1);
  const auto gs = gram(fam, Horizon::infinite(), 256);
  PrecisionScope s(256);
  MpMatrix Gn(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) Gn(i, j) = gs.G(i, j);
  const auto chol = Cholesky::factor(Gn);
  REQUIRE(chol.has_value());
  const MpMatrix X = chol->inverse();
  std::vector<mp_real> b(N);
  for (int i = 0; i < N; ++i) b[i] = gs.G(i, N);
  const auto proj = chol->solve(b);

  std::mt19937 rng(12345);
  std::normal_distribution<double> dist;
  for (int n = 0; n < N; ++n) {
    std::vector<mp_real> psi(N + 1, mp_real(0));
    for (int k = 0; k < N; ++k) psi[k] = X(n, k);
    auto quad = [&](const std::vector<mp_real>& c) {
      mp_real q = 0;
      for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) q += c[i] * gs.G(i, j) * c[j];
      return q;
    };
    const mp_real base = quad(psi);
    for (int trial = 0; trial < 5; ++trial) {
      const double t = dist(rng);
      auto pert = psi;
      for (int k = 0; k < N; ++k) pert[k] -= t * proj[k];
      pert[N] += t;
      for (int m = 0; m < N; ++m) {
        mp_real ip = 0;
        for (int k = 0; k <= N; ++k) ip += pert[k] * gs.G(k, m);
        CHECK(static_cast<double>(abs(ip - (m == n ? 1 : 0))) < 1e-30);
      }
      CHECK(quad(pert) >= base);
    }
  }
}

TEST_CASE("Cauchy inverse diagonal") {
  CHECK(cauchy_diag(ExponentFamily::explicit_values({1.0, 2.0}))[0] == doctest::Approx(18.0).epsilon(1e-15));
  CHECK(cauchy_diag(ExponentFamily::explicit_values({1.0}))[0] == doctest::Approx(2.0).epsilon(1e-15));

  SUBCASE("nondecreasing in the family size") {
    for (int n : {1, 5, 10}) {
      double prev = 0.0;
      for (int size = n; size <= n + 15; ++size) {
        const std::size_t pos[] = {static_cast<std::size_t>(n - 1)};
        const double v = cauchy_log_diag(ExponentFamily::dirichlet(size), pos)[0];
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
  SUBCASE("large families approach 2 sinh^2(pi n)") {
    // over all k >= 1 the product equals sinh^2(pi n) / (pi n)^2; truncation at N lowers the log by ~4 n^2 / N
    const auto fam = ExponentFamily::dirichlet(4000);
    std::vector<std::size_t> pos{0, 4, 9, 19};
    const auto logs = cauchy_log_diag(fam, pos);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const double n = static_cast<double>(pos[i] + 1);
      const double exact = std::log(2.0) + 2.0 * std::log(std::sinh(kPi * n));
      CHECK(std::abs(logs[i] - exact) <= 5.0 * n * n / 4000.0);
    }
  }
  SUBCASE("growth slope is pi") {
    const auto fam = ExponentFamily::dirichlet(4000);
    std::vector<std::size_t> pos;
    std::vector<double> x, y;
    for (int n = 10; n <= 30; ++n) pos.push_back(static_cast<std::size_t>(n - 1));
    const auto logs = cauchy_log_diag(fam, pos);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      x.push_back(static_cast<double>(pos[i] + 1));
      y.push_back(0.5 * logs[i]);
    }
    const auto fit = fit_line(x, y, 10, 30);
    CHECK(fit.slope >= 0.95 * kPi);
    CHECK(fit.slope <= 1.05 * kPi);
  }
}

TEST_CASE("growth fit") {
  BiorthReport flat;
  for (int n = 1; n <= 10; ++n) {
    flat.n.push_back(n);
    flat.log_norm.push_back(0.25);
  }
  const auto f = growth_fit(flat);
  CHECK(f.slope == doctest::Approx(0.0).scale(1.0));
  CHECK(f.points == 5);
  CHECK(f.rms_residual == doctest::Approx(0.0).scale(1.0));

  BiorthReport line = flat;
  for (std::size_t i = 0; i < line.n.size(); ++i) line.log_norm[i] = 3.0 * line.n[i] - 1.0;
  CHECK(growth_fit(line, 1, 10).slope == doctest::Approx(3.0));
  CHECK(growth_fit(line, 1, 10).intercept == doctest::Approx(-1.0));

  BiorthReport few = flat;
  few.n.resize(5);
  few.log_norm.resize(5);
  CHECK_THROWS_AS(growth_fit(few), InvalidArgument);
}

TEST_CASE("minimal-norm controls") {
  const auto g = TimeGrid::make(1.0, 2000);
  auto xi = [](int n) { return 1.0 / n; };

  SUBCASE("single memoryless mode: |target| / |kernel|") {
    const auto rt = resolvent_of(MemoryKernel::zero(), g);
    const std::vector<Mode> modes{make_mode(1, 0.0)};
    const auto mp = build_moment_problem(modes, rt, xi);
    const auto r = min_norm_control(mp, 1);
    // |E_1|^2 = mu^4 (g0^2 + g1^2) (1 - exp(-2 mu^2)) / (2 mu^2), g0^2 + g1^2 = 4 pi^2
    const double mu2 = kPi * kPi;
    const double k2 = mu2 * mu2 * 4 * mu2 * -std::expm1(-2 * mu2) / (2 * mu2);
    CHECK(r.norm == doctest::Approx(std::abs(mp.entries[0].target()) / std::sqrt(k2)).epsilon(1e-13));
    CHECK(std::sqrt(r.control.l2_norm_squared()) == doctest::Approx(r.norm).epsilon(1e-5));
  }
  SUBCASE("memoryless control steps the modes to rest") {
    const auto rt = resolvent_of(MemoryKernel::zero(), g);
    std::vector<Mode> modes;
    for (int n = 1; n <= 6; ++n) modes.push_back(make_mode(n, 0.0));
    const auto mp = build_moment_problem(modes, rt, xi);
    const auto r = min_norm_control(mp, 6);
    CHECK(r.deficiency <= 1e-4);
    CHECK(r.coefficients.size() == 6);
  }
  SUBCASE("constant memory") {
    const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
    std::vector<Mode> modes;
    for (int n = 1; n <= 4; ++n) modes.push_back(make_mode(n, rt.a));
    const auto mp = build_moment_problem(modes, rt, xi);
    double prev = 0.0, xi2 = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const auto r = min_norm_control(mp, k);
      xi2 += xi(k) * xi(k);
      CHECK(r.norm >= prev);
      CHECK(r.norm <= r.worst_case_cost * std::sqrt(xi2) * (1 + 1e-9));
      prev = r.norm;
    }
    CHECK_THROWS_AS(min_norm_control(mp, 0), InvalidArgument);
    CHECK_THROWS_AS(min_norm_control(mp, 5), InvalidArgument);
    ControlOptions none;
    none.endpoints = {false, false};
    CHECK_THROWS_AS(min_norm_control(mp, 1, none), InvalidArgument);
  }
  SUBCASE("sampled control meets the moments at second order") {
    double res[2];
    for (int h = 0; h < 2; ++h) {
      const auto gh = TimeGrid::make(1.0, h ? 4000 : 2000);
      const auto rt = resolvent_of(MemoryKernel::constant(1.0), gh);
      std::vector<Mode> modes;
      for (int n = 1; n <= 3; ++n) modes.push_back(make_mode(n, rt.a));
      res[h] = min_norm_control(build_moment_problem(modes, rt, xi), 3).moment_residual;
    }
    MESSAGE(res[0], " ", res[1]);
    CHECK(res[0] < 2e-3);
    CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.15));
  }
  SUBCASE("single endpoint") {
    const auto rt = resolvent_of(MemoryKernel::constant(1.0), g);
    std::vector<Mode> modes;
    for (int n = 1; n <= 3; ++n) modes.push_back(make_mode(n, rt.a));
    const auto mp = build_moment_problem(modes, rt, xi);
    ControlOptions left;
    left.endpoints = {true, false};
    const auto r = min_norm_control(mp, 3, left);
    CHECK(r.control.at(1).sup_norm() == 0.0);
    CHECK(r.moment_residual <= 5e-3);
  }
}
