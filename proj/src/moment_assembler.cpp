#include "cgm/moment_assembler.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "cgm/errors.hpp"

namespace cgm {
namespace {

// (f * g)(T) by the trapezoid rule, without forming the whole convolution.
double convolve_at_end(const SampledFunction& f, const SampledFunction& g) {
  const std::size_t n = f.size() - 1;
  double s = 0.5 * (f[n] * g[0] + f[0] * g[n]);
  for (std::size_t j = 1; j < n; ++j) s += f[n - j] * g[j];
  return s * f.grid()->dt();
}

double free_response_at_end(const Mode& mode, const SampledFunction& R_e0, const SampledFunction& H,
                            const SampledFunction& h) {
  const double e0T = std::exp(-mode.mu2 * H.grid()->horizon());
  // [A - H*A](T) with A = e0 - R*e0 and H*e0 = h carried with exact weights.
  return e0T - R_e0.back() - h.back() + convolve_at_end(H, R_e0);
}

bool is_memoryless(const ResolventTriple& rt) { return rt.a == 0.0 && rt.R.sup_norm() == 0.0; }

}  // namespace

double rhs_d(const Mode& mode, const ResolventTriple& rt, const SampledFunction& H, double xi) {
  require_same_grid(rt.R, H, "rhs_d");
  if (xi == 0.0) return 0.0;
  const SampledFunction R_e0 = convolve_exp(rt.R, mode.mu2, 0);
  const SampledFunction h = convolve_exp(H, mode.mu2, 0);
  return free_response_at_end(mode, R_e0, H, h) * xi;
}

AsymptoticReport dn_asymptotic_check(std::span<const Mode> modes, const ResolventTriple& rt,
                                     const AsymptoticOptions& opts) {
  AsymptoticReport rep{rt.R.back(), is_memoryless(rt), {}, 0.0};
  if (!rep.memoryless && std::abs(rep.R_T) <= opts.vanishing_tol * rt.R.sup_norm()) {
    std::ostringstream os;
    os << "R(T) = " << rep.R_T << " vanishes at T = " << rt.R.grid()->horizon()
       << "; the negative result needs R(T) != 0. Choose another T, or use the first"
       << " derivative R^(k)(T) that does not vanish";
    throw HypothesisViolation(os.str());
  }
  for (const auto& m : modes) {
    if (!(m.mu2 > 0.0)) continue;
    const SampledFunction H = H_direct(rt.L, m.mu2);
    const double scaled = m.mu2 * rhs_d(m, rt, H, 1.0);
    const double residual = scaled + rep.R_T;
    rep.rows.push_back({m.n, m.mu2, scaled, residual, residual * m.mu2});
    rep.sup_residual_scaled = std::max(rep.sup_residual_scaled, std::abs(residual * m.mu2));
  }
  return rep;
}

std::optional<int> scope_threshold(const AsymptoticReport& report) {
  if (report.rows.empty()) return std::nullopt;
  if (report.memoryless) return report.rows.front().n;
  const double bound = 0.5 * std::abs(report.R_T);
  std::optional<int> first;
  for (const auto& r : report.rows) {
    if (std::abs(r.residual) < bound) {
      if (!first) first = r.n;
    } else {
      first.reset();
    }
  }
  return first;
}

MomentKernel::MomentKernel(Mode mode, SampledFunction correction)
    : mode_(mode), correction_(std::move(correction)) {
  if (!(mode_.mu2 > 0.0)) throw InvalidArgument("moment kernel needs mu2 > 0");
}

SampledFunction MomentKernel::shape() const { return e_k(grid(), mode_.mu2, 0) - correction_; }

SampledFunction MomentKernel::profile(int endpoint) const {
  if (endpoint != 0 && endpoint != 1) throw InvalidArgument("endpoint must be 0 or 1");
  return (mode_.mu2 * mode_.traces[endpoint]) * shape();
}

double MomentKernel::pair_profile(const BoundaryControl& chi) const {
  if (chi.grid() != grid()) throw GridMismatch("moment pairing");
  double total = 0.0;
  for (int e = 0; e < 2; ++e) {
    if (!chi.active()[e]) continue;
    const auto& c = chi.at(e);
    std::vector<double> ch(c.size());
    for (std::size_t k = 0; k < ch.size(); ++k) ch[k] = c[k] * correction_[k];
    const double v = exp_weighted_integral(c, mode_.mu2) - integrate(SampledFunction(grid(), std::move(ch)));
    total += mode_.mu2 * mode_.traces[e] * v;
  }
  return total;
}

double MomentKernel::pair_control(const BoundaryControl& f) const {
  BoundaryControl chi(f.at(0).reversed(), f.at(1).reversed(), f.active());
  return pair_profile(chi);
}

MomentKernel moment_kernels(const Mode& mode, const SampledFunction& H) {
  return MomentKernel(mode, convolve_exp(H, mode.mu2, 0));
}

MomentProblem build_moment_problem(std::span<const Mode> modes, const ResolventTriple& rt,
                                   const std::function<double(int)>& xi, const MomentOptions& opts) {
  MomentProblem mp{rt.R.grid()->horizon(), rt.R.grid(), rt, is_memoryless(rt), {}};
  mp.entries.reserve(modes.size());
  for (const auto& m : modes) {
    if (!(m.mu2 > 0.0)) {
      std::ostringstream os;
      os << "mode " << m.n << " has mu2 = " << m.mu2 << " <= 0 and cannot enter the moment problem";
      throw InvalidArgument(os.str());
    }
    SampledFunction H = opts.use_series ? H_series(rt.L, m.mu2, opts.series_tol).H : H_direct(rt.L, m.mu2);
    const SampledFunction R_e0 = convolve_exp(rt.R, m.mu2, 0);
    SampledFunction h = convolve_exp(H, m.mu2, 0);
    const double x = xi(m.n);
    const double unit = free_response_at_end(m, R_e0, H, h);
    mp.entries.push_back({m, x, unit, x == 0.0 ? 0.0 : unit * x, H, MomentKernel(m, std::move(h))});
  }
  return mp;
}

std::vector<double> rescaled_targets(const AsymptoticReport& report, std::span<const double> xi) {
  if (xi.size() != report.rows.size()) throw InvalidArgument("one initial datum per tabulated mode");
  std::vector<double> c(xi.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = report.rows[i].scaled * xi[i];
  return c;
}

std::vector<double> initial_data_for(const AsymptoticReport& report, std::span<const double> c) {
  if (c.size() != report.rows.size()) throw InvalidArgument("one target per tabulated mode");
  std::vector<double> xi(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (report.rows[i].scaled == 0.0) throw NumericalError("diagonal map not invertible at this mode");
    xi[i] = c[i] / report.rows[i].scaled;
  }
  return xi;
}

std::vector<BoundaryControl> reduce_scalar(std::span<const BoundaryControl> chi, const TriangularKernel& G) {
  std::vector<BoundaryControl> out;
  out.reserve(chi.size());
  for (const auto& c : chi) {
    if (c.grid() != G.grid()) throw GridMismatch("reduce_scalar");
    const double dt = G.grid()->dt();
    const std::size_t n = G.grid()->steps();
    std::array<std::vector<double>, 2> red;
    for (int e = 0; e < 2; ++e) {
      const auto& f = c.at(e);
      red[e].assign(f.size(), 0.0);
      for (std::size_t j = 0; j <= n; ++j) {
        double s = 0.0;
        if (j < n) {
          s = 0.5 * (G(j, j) * f[j] + G(n, j) * f[n]);
          for (std::size_t i = j + 1; i < n; ++i) s += G(i, j) * f[i];
          s *= dt;
        }
        red[e][j] = f[j] - s;
      }
    }
    out.emplace_back(SampledFunction(c.grid(), std::move(red[0])), SampledFunction(c.grid(), std::move(red[1])),
                     c.active());
  }
  return out;
}

SampledFunction trace_sum(const Mode& mode, const BoundaryControl& reduced) {
  return trace_pairing(mode, reduced);
}

double scalar_pairing(const Mode& mode, const BoundaryControl& reduced) {
  return mode.mu2 * exp_weighted_integral(trace_sum(mode, reduced), mode.mu2);
}

}  // namespace cgm
