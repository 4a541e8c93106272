#include "cgm/biorth_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "cgm/errors.hpp"
#include "cgm/memory_dynamics.hpp"

namespace cgm {
namespace {

double log10_inf_norm_product(const MpMatrix& a, const MpMatrix& b) {
  auto inf_norm = [](const MpMatrix& m) {
    mp_real best = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      mp_real row = 0;
      for (std::size_t j = 0; j < m.size(); ++j) row += abs(m(i, j));
      if (row > best) best = row;
    }
    return best;
  };
  return static_cast<double>(log10(inf_norm(a) * inf_norm(b)));
}

std::string escalation_note(const char* what, long bits, double residual) {
  std::ostringstream os;
  os << what << " at " << bits << " bits";
  if (std::isfinite(residual)) os << " (residual " << residual << ")";
  os << "; escalating precision";
  return os.str();
}

// Largest eigenvalue of a symmetric positive semidefinite matrix.
double power_iteration(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  std::vector<double> v(n, 1.0), w(n);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) w[i] += m[i][j] * v[j];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    double next = 0.0;
    for (std::size_t i = 0; i < n; ++i) next += v[i] * w[i];
    double vn = 0.0;
    for (double x : v) vn += x * x;
    next /= vn;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 10 && std::abs(next - lambda) <= 1e-14 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

Horizon Horizon::finite(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("finite horizon needs 0 < T < inf");
  return Horizon(T);
}

double Horizon::T() const {
  if (!T_) throw InvalidArgument("infinite horizon has no T");
  return *T_;
}

std::string Horizon::describe() const {
  if (!T_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << *T_;
  return os.str();
}

ExponentFamily ExponentFamily::dirichlet(int count, double shift, int first) {
  if (count < 1 || first < 1) throw InvalidArgument("dirichlet family needs count >= 1 and first >= 1");
  ExponentFamily f;
  f.dirichlet_ = true;
  f.shift_ = shift;
  f.labels_.resize(static_cast<std::size_t>(count));
  std::iota(f.labels_.begin(), f.labels_.end(), first);
  return f;
}

ExponentFamily ExponentFamily::explicit_values(std::vector<double> mu2) {
  if (mu2.empty()) throw InvalidArgument("empty exponent family");
  ExponentFamily f;
  f.explicit_ = std::move(mu2);
  f.labels_.resize(f.explicit_.size());
  std::iota(f.labels_.begin(), f.labels_.end(), 1);
  return f;
}

std::vector<mp_real> ExponentFamily::values() const {
  std::vector<mp_real> v;
  v.reserve(size());
  if (dirichlet_) {
    mp_real pi;
    mpfr_const_pi(pi.backend().data(), MPFR_RNDN);
    for (int n : labels_) v.push_back(mp_real(n) * n * pi * pi - shift_);
  } else {
    for (double x : explicit_) v.emplace_back(x);
  }
  for (const auto& x : v) {
    if (!(x > 0)) throw InvalidArgument("exponents must be positive");
  }
  std::vector<mp_real> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw NumericalError("singular Gram matrix: duplicate exponents");
  }
  return v;
}

GramSystem gram(const ExponentFamily& family, const Horizon& horizon, long bits) {
  PrecisionScope scope(bits);
  GramSystem gs{family.values(), horizon, bits, MpMatrix(family.size())};
  const std::size_t n = family.size();
  const mp_real T = horizon.is_infinite() ? mp_real(0) : mp_real(horizon.T());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const mp_real s = gs.exponents[i] + gs.exponents[j];
      mp_real g = horizon.is_infinite() ? mp_real(1 / s) : mp_real(-expm1(-s * T) / s);
      gs.G(i, j) = g;
      gs.G(j, i) = g;
    }
  }
  return gs;
}

BiorthReport min_norm_biorth(const ExponentFamily& family, const Horizon& horizon, const BiorthOptions& opts) {
  BiorthReport rep;
  double last_cond = std::numeric_limits<double>::infinity();
  for (long bits = opts.bits; bits <= opts.max_bits; bits *= 2) {
    const GramSystem gs = gram(family, horizon, bits);
    PrecisionScope scope(bits);
    const auto chol = Cholesky::factor(gs.G);
    if (!chol) {
      last_cond = static_cast<double>(bits) * std::log10(2.0);
      rep.warnings.push_back(escalation_note("Gram matrix not positive definite", bits, NAN));
      continue;
    }
    const MpMatrix X = chol->inverse();
    const MpMatrix P = X * gs.G;
    last_cond = log10_inf_norm_product(gs.G, X);

    const std::size_t n = family.size();
    std::vector<double> res(n, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mp_real r = 0;
      for (std::size_t j = 0; j < n; ++j) {
        mp_real d = abs(P(i, j) - (i == j ? 1 : 0));
        if (d > r) r = d;
      }
      res[i] = static_cast<double>(r);
      worst = std::max(worst, res[i]);
    }
    if (!(worst < opts.residual_tol)) {
      rep.warnings.push_back(escalation_note("biorthogonality residual above tolerance", bits, worst));
      continue;
    }
    rep.n = family.labels();
    rep.residual = std::move(res);
    rep.max_residual = worst;
    rep.bits_used = precision_bits(X(0, 0));
    rep.log10_condition = last_cond;
    for (std::size_t i = 0; i < n; ++i) {
      rep.norm2.push_back(static_cast<double>(X(i, i)));
      rep.log_norm.push_back(0.5 * static_cast<double>(log(X(i, i))));
    }
    return rep;
  }
  std::ostringstream os;
  os << "biorthogonal family not resolved at " << opts.max_bits << " bits";
  throw PrecisionExhausted(os.str(), last_cond);
}

namespace {

template <class Finish>
std::vector<double> cauchy_diag_impl(const ExponentFamily& family, std::span<const std::size_t> positions,
                                     long bits, Finish finish) {
  PrecisionScope scope(bits);
  const auto mu = family.values();
  std::vector<std::size_t> pos(positions.begin(), positions.end());
  if (pos.empty()) {
    pos.resize(mu.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
  }
  std::vector<double> out;
  out.reserve(pos.size());
  for (std::size_t p : pos) {
    if (p >= mu.size()) throw InvalidArgument("position outside the exponent family");
    const mp_real& x = mu[p];
    mp_real s = log(2 * x);
    for (std::size_t k = 0; k < mu.size(); ++k) {
      if (k == p) continue;
      const mp_real gap = abs(mu[k] - x);
      if (gap < 1e-10 * x) {
        std::clog << "warning: exponents " << static_cast<double>(mu[k]) << " and " << static_cast<double>(x)
                  << " nearly coincide; Cauchy inverse is badly conditioned\n";
      }
      s += 2 * log((mu[k] + x) / gap);
    }
    out.push_back(finish(s));
  }
  return out;
}

}  // namespace

std::vector<double> cauchy_log_diag(const ExponentFamily& family, std::span<const std::size_t> positions, long bits) {
  return cauchy_diag_impl(family, positions, bits, [](const mp_real& s) { return static_cast<double>(s); });
}

std::vector<double> cauchy_diag(const ExponentFamily& family, std::span<const std::size_t> positions, long bits) {
  return cauchy_diag_impl(family, positions, bits, [](const mp_real& s) { return static_cast<double>(exp(s)); });
}

GrowthFit fit_line(std::span<const double> x, std::span<const double> y, double lo, double hi) {
  if (x.size() != y.size()) throw InvalidArgument("fit_line needs matching x and y");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    ++m;
  }
  if (m < 2) throw InvalidArgument("fit_line needs at least two points in range");
  const double den = m * sxx - sx * sx;
  if (den == 0.0) throw InvalidArgument("fit_line needs distinct abscissae");
  GrowthFit f{(m * sxy - sx * sy) / den, 0.0, 0.0, m};
  f.intercept = (sy - f.slope * sx) / m;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / m);
  return f;
}

GrowthFit growth_fit(const BiorthReport& report, int n_lo, int n_hi) {
  std::vector<double> x(report.n.begin(), report.n.end());
  return fit_line(x, report.log_norm, n_lo, n_hi);
}

GrowthFit growth_fit(const BiorthReport& report) {
  if (report.n.size() < 8) throw InvalidArgument("growth_fit needs at least 8 indices");
  return growth_fit(report, report.n[report.n.size() / 2], report.n.back());
}

ControlResult min_norm_control(const MomentProblem& mp, int N_active, const ControlOptions& opts) {
  if (N_active < 1 || static_cast<std::size_t>(N_active) > mp.entries.size()) {
    std::ostringstream os;
    os << "N_active = " << N_active << " outside 1.." << mp.entries.size();
    throw InvalidArgument(os.str());
  }
  if (!opts.endpoints[0] && !opts.endpoints[1]) throw InvalidArgument("no active boundary endpoint");
  const auto N = static_cast<std::size_t>(N_active);
  const auto& grid = mp.grid;
  const std::size_t K = grid->size();

  std::vector<SampledFunction> shapes;
  std::vector<double> c(N);
  double cmax = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    shapes.push_back(mp.entries[i].kernel.shape());
    c[i] = mp.entries[i].target();
    cmax = std::max(cmax, std::abs(c[i]));
  }
  auto trace_weight = [&](std::size_t i, std::size_t j) {
    const auto& ti = mp.entries[i].mode.traces;
    const auto& tj = mp.entries[j].mode.traces;
    double s = 0.0;
    for (int e = 0; e < 2; ++e)
      if (opts.endpoints[e]) s += ti[e] * tj[e];
    return mp.entries[i].mode.mu2 * mp.entries[j].mode.mu2 * s;
  };
  // int (e0_i - h_i)(e0_j - h_j): the exponential product exactly, cross terms
  // with fitted weights, and only the smooth h_i h_j term by the trapezoid rule.
  std::vector<std::vector<double>> correction(N, std::vector<double>(N, 0.0));
  for (std::size_t i = 0; i < N; ++i) {
    const auto& hi = mp.entries[i].kernel.correction();
    for (std::size_t j = i; j < N; ++j) {
      const auto& hj = mp.entries[j].kernel.correction();
      if (hi.sup_norm() == 0.0 && hj.sup_norm() == 0.0) continue;
      std::vector<double> prod(K);
      for (std::size_t k = 0; k < K; ++k) prod[k] = hi[k] * hj[k];
      correction[i][j] = correction[j][i] = integrate(SampledFunction(grid, std::move(prod))) -
                                            exp_weighted_integral(hj, mp.entries[i].mode.mu2) -
                                            exp_weighted_integral(hi, mp.entries[j].mode.mu2);
    }
  }

  std::vector<std::string> warnings;
  double last_cond = std::numeric_limits<double>::infinity();
  for (long bits = opts.bits; bits <= opts.max_bits; bits *= 2) {
    PrecisionScope scope(bits);
    MpMatrix G(N);
    const mp_real T = mp.T;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i; j < N; ++j) {
        const mp_real s = mp_real(mp.entries[i].mode.mu2) + mp.entries[j].mode.mu2;
        mp_real acc = -expm1(-s * T) / s;
        acc += correction[i][j];
        acc *= trace_weight(i, j);
        G(i, j) = acc;
        G(j, i) = acc;
      }
    }
    const auto chol = Cholesky::factor(G);
    if (!chol) {
      last_cond = static_cast<double>(bits) * std::log10(2.0);
      warnings.push_back(escalation_note("control Gram matrix not positive definite", bits, NAN));
      continue;
    }
    std::vector<mp_real> rhs(c.begin(), c.end());
    const auto y = chol->solve(rhs);
    const auto Gy = G * y;
    mp_real rnum = 0, rden = 0;
    for (std::size_t i = 0; i < N; ++i) {
      rnum = std::max<mp_real>(rnum, abs(Gy[i] - rhs[i]));
      rden = std::max<mp_real>(rden, abs(rhs[i]));
    }
    const double rel = rden > 0 ? static_cast<double>(rnum / rden) : 0.0;
    const MpMatrix X = chol->inverse();
    last_cond = log10_inf_norm_product(G, X);
    if (!(rel < opts.solve_tol)) {
      warnings.push_back(escalation_note("control Gram solve residual above tolerance", bits, rel));
      continue;
    }

    mp_real norm2 = 0;
    for (std::size_t i = 0; i < N; ++i) norm2 += y[i] * rhs[i];
    const double norm = std::sqrt(std::max(0.0, static_cast<double>(norm2)));

    // chi(x, s) = sum_n y_n E_n(x, s), accumulated in extended precision
    std::array<std::vector<double>, 2> chi;
    for (int e = 0; e < 2; ++e) {
      chi[e].assign(K, 0.0);
      if (!opts.endpoints[e]) continue;
      for (std::size_t k = 0; k < K; ++k) {
        mp_real s = 0;
        for (std::size_t i = 0; i < N; ++i) {
          const auto& m = mp.entries[i].mode;
          s += y[i] * (m.mu2 * m.traces[e]) * shapes[i][k];
        }
        chi[e][k] = static_cast<double>(s);
      }
    }
    BoundaryControl f(SampledFunction(grid, std::move(chi[0])).reversed(),
                      SampledFunction(grid, std::move(chi[1])).reversed(), opts.endpoints);

    double mres = 0.0;
    double def2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto& entry = mp.entries[i];
      mres = std::max(mres, std::abs(entry.kernel.pair_control(f) - c[i]));
      const auto tr = solve_mode(entry.mode, mp.rt, entry.xi, trace_pairing(entry.mode, f));
      const double a = tr.w.back() / entry.mode.lambda2;
      def2 += a * a;
    }

    std::vector<std::vector<double>> W(N, std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        const double di = mp.entries[i].mode.mu2 * mp.entries[i].d_unit;
        const double dj = mp.entries[j].mode.mu2 * mp.entries[j].d_unit;
        W[i][j] = static_cast<double>(X(i, j) * di * dj);
      }

    std::vector<double> coeffs;
    for (const auto& v : y) coeffs.push_back(static_cast<double>(v));
    return ControlResult{
        .N_active = N_active,
        .norm = norm,
        .log_norm = std::log(norm),
        .moment_residual = cmax > 0.0 ? mres / cmax : mres,
        .deficiency = std::sqrt(def2),
        .worst_case_cost = std::sqrt(std::max(0.0, power_iteration(W))),
        .coefficients = std::move(coeffs),
        .control = std::move(f),
        .bits_used = precision_bits(y.front()),
        .warnings = std::move(warnings),
    };
  }
  std::ostringstream os;
  os << "minimal-norm control not resolved at " << opts.max_bits << " bits";
  throw PrecisionExhausted(os.str(), last_cond);
}

}  // namespace cgm
