#pragma once

// Per-mode dynamics of w_t = w_xx + int_0^t M(t-s) w_xx(s) ds with boundary data f.
//
// Projected on phi_n, with e0(t) = exp(-mu_n^2 t) and g_n the boundary pairing,
//
//   w_n + Z_n * w_n = (e0 - e0 * R) xi_n - e0 * g_n,   Z_n = -L * e0,
//
// which solve_mode discretizes directly. explicit_mode instead applies the
// resolvent H_n of Z_n to the right-hand side: w_n = k - H_n * k.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cgm/kernel_algebra.hpp"
#include "cgm/spectral_domain.hpp"

namespace cgm {

struct ModalTrajectory {
  Mode mode;
  SampledFunction w;
};

/// Memoryless heat equation projected on one mode.
ModalTrajectory heat_mode(const Mode& mode, double xi, const SampledFunction& g);

/// Second-kind Volterra solve of the projected equation.
ModalTrajectory solve_mode(const Mode& mode, const ResolventTriple& rt, double xi, const SampledFunction& g);

/// Closed form through the resolvent H of Z_n; no Volterra solve.
ModalTrajectory explicit_mode(const Mode& mode, const ResolventTriple& rt, const SampledFunction& H, double xi,
                              const SampledFunction& g);

/// Free part (e0 - e0 * R) of the right-hand side.
SampledFunction free_forcing(const Mode& mode, const ResolventTriple& rt);

class FieldSolution {
 public:
  /// Modes must be 1..N in order; the spatial grid defaults to 201 points on [0, 1].
  explicit FieldSolution(std::vector<ModalTrajectory> trajectories, std::size_t spatial_points = 201);

  const std::vector<ModalTrajectory>& trajectories() const noexcept { return trajectories_; }
  const std::vector<double>& x() const noexcept { return x_; }
  const GridPtr& grid() const { return trajectories_.front().w.grid(); }

 private:
  std::vector<ModalTrajectory> trajectories_;
  std::vector<double> x_;
};

struct Snapshot {
  double t;
  std::vector<double> x;
  std::vector<double> w;              ///< sum_n phi_n(x) w_n(t)
  std::vector<double> a_inv;          ///< -w_n(t) / lambda_n^2
  double deficiency;                  ///< l2 norm of a_inv
};

Snapshot assemble(const FieldSolution& field, double t);

/// l2 norm of {-w_n(t)/lambda_n^2} at every node (diagnostic only; no spatial samples).
SampledFunction deficiency_series(const FieldSolution& field);

/// Estimate of the A^{-1}-norm of the uncontrolled tail n > N at time T,
/// using |w_n(T)| <= 2 |xi_n| (exp(-mu_n^2 T) + sup|R| / mu_n^2).
double tail_bound(int N, double a, double T, double sup_R, const std::function<double(int)>& xi);

}  // namespace cgm
