#include "cgm/memory_dynamics.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "cgm/errors.hpp"

namespace cgm {

ModalTrajectory heat_mode(const Mode& mode, double xi, const SampledFunction& g) {
  const SampledFunction e0 = e_k(g.grid(), mode.lambda2, 0);
  const SampledFunction forced = convolve_exp(g, mode.lambda2, 0);
  return {mode, xi * e0 - forced};
}

SampledFunction free_forcing(const Mode& mode, const ResolventTriple& rt) {
  const SampledFunction e0 = e_k(rt.R.grid(), mode.mu2, 0);
  return e0 - convolve_exp(rt.R, mode.mu2, 0);
}

ModalTrajectory solve_mode(const Mode& mode, const ResolventTriple& rt, double xi, const SampledFunction& g) {
  require_same_grid(rt.R, g, "solve_mode");
  if (!(mode.mu2 > 0.0)) {
    std::clog << "warning: solve_mode on mode " << mode.n << " with mu2 = " << mode.mu2 << " <= 0\n";
  }
  const SampledFunction Z = -convolve_exp(rt.L, mode.mu2, 0);
  const SampledFunction rhs = xi * free_forcing(mode, rt) - convolve_exp(g, mode.mu2, 0);
  return {mode, volterra_solve(Z, rhs)};
}

ModalTrajectory explicit_mode(const Mode& mode, const ResolventTriple& rt, const SampledFunction& H, double xi,
                              const SampledFunction& g) {
  require_same_grid(H, g, "explicit_mode");
  require_same_grid(rt.R, g, "explicit_mode");
  const SampledFunction A = free_forcing(mode, rt);
  const SampledFunction B = convolve_exp(g, mode.mu2, 0);
  SampledFunction w = xi * (A - convolve(H, A)) - (B - convolve(H, B));
  return {mode, std::move(w)};
}

FieldSolution::FieldSolution(std::vector<ModalTrajectory> trajectories, std::size_t spatial_points)
    : trajectories_(std::move(trajectories)) {
  if (trajectories_.empty()) throw InvalidArgument("field solution needs at least one mode");
  if (spatial_points < 2) throw InvalidArgument("spatial grid needs at least two points");
  for (std::size_t i = 0; i < trajectories_.size(); ++i) {
    if (trajectories_[i].mode.n != static_cast<int>(i) + 1) {
      std::ostringstream os;
      os << "modal indices must be contiguous from 1; position " << i << " holds mode " << trajectories_[i].mode.n;
      throw InvalidArgument(os.str());
    }
    require_same_grid(trajectories_[i].w, trajectories_.front().w, "field solution");
  }
  x_.resize(spatial_points);
  for (std::size_t i = 0; i < spatial_points; ++i) x_[i] = static_cast<double>(i) / (spatial_points - 1);
}

Snapshot assemble(const FieldSolution& field, double t) {
  const auto k = field.grid()->index_of(t);
  if (!k) {
    std::ostringstream os;
    os << "time " << t << " is not a grid node";
    throw InvalidArgument(os.str());
  }
  Snapshot s{field.grid()->node(*k), field.x(), std::vector<double>(field.x().size(), 0.0), {}, 0.0};
  double sq = 0.0;
  for (const auto& tr : field.trajectories()) {
    const double wn = tr.w[*k];
    for (std::size_t i = 0; i < s.x.size(); ++i) s.w[i] += eigenfunction(tr.mode.n, s.x[i]) * wn;
    const double c = -wn / tr.mode.lambda2;
    s.a_inv.push_back(c);
    sq += c * c;
  }
  s.deficiency = std::sqrt(sq);
  return s;
}

SampledFunction deficiency_series(const FieldSolution& field) {
  const auto& grid = field.grid();
  std::vector<double> d(grid->size(), 0.0);
  for (const auto& tr : field.trajectories()) {
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double c = tr.w[k] / tr.mode.lambda2;
      d[k] += c * c;
    }
  }
  for (double& v : d) v = std::sqrt(v);
  return SampledFunction(grid, std::move(d));
}

double tail_bound(int N, double a, double T, double sup_R, const std::function<double(int)>& xi) {
  double sq = 0.0;
  for (int n = N + 1; n < N + 100000; ++n) {
    const Mode m = make_mode(n, a);
    if (!(m.mu2 > 0.0)) continue;
    const double bound = 2.0 * std::abs(xi(n)) * (std::exp(-m.mu2 * T) + sup_R / m.mu2) / m.lambda2;
    sq += bound * bound;
    if (bound * bound < 1e-300 || (n > N + 10 && bound * bound < 1e-20 * sq)) break;
  }
  return std::sqrt(sq);
}

}  // namespace cgm
