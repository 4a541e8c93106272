#pragma once

// The moment problem for null controllability at time T.
//
// For every mode n the control must satisfy
//
//   int_0^T sum_{x in {0,1}} f(x, T - s) E_n(x, s) ds = c_n = mu_n^2 d_n,
//   E_n(x, s) = mu_n^2 (gamma_1 phi_n)(x) (e0(s) - (H_n * e0)(s)),
//
// where d_n is the free response [A - H_n * A](T) xi_n, A = e0 - e0 * R.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cgm/kernel_algebra.hpp"
#include "cgm/spectral_domain.hpp"

namespace cgm {

/// d_n = [e0 - e0*R - H*(e0 - e0*R)](T) xi, with T the grid horizon.
double rhs_d(const Mode& mode, const ResolventTriple& rt, const SampledFunction& H, double xi);

struct AsymptoticRow {
  int n;
  double mu2;
  double scaled;           ///< mu_n^2 d_n / xi_n
  double residual;         ///< scaled + R(T)
  double residual_scaled;  ///< residual * mu_n^2, the bounded sequence M_n
};

struct AsymptoticReport {
  double R_T;
  bool memoryless;
  std::vector<AsymptoticRow> rows;
  double sup_residual_scaled;
};

struct AsymptoticOptions {
  /// |R(T)| below this fraction of sup|R| counts as R(T) = 0.
  double vanishing_tol = 1e-4;
};

/// Tabulates mu_n^2 d_n / xi_n against -R(T). H_n comes from H_direct.
/// Throws HypothesisViolation when R(T) vanishes for a nonzero kernel.
AsymptoticReport dn_asymptotic_check(std::span<const Mode> modes, const ResolventTriple& rt,
                                     const AsymptoticOptions& opts = {});

/// Smallest index n with mu_n^2 > 0 from which every later row satisfies
/// |M_n / mu_n^2| < |R(T)| / 2. Empty if no such index is listed.
std::optional<int> scope_threshold(const AsymptoticReport& report);

/// Time profile of E_n at both endpoints, stored as mu2, traces and the
/// correction h = H * e0 so that pairings can treat e0 with exact weights.
class MomentKernel {
 public:
  MomentKernel(Mode mode, SampledFunction correction);

  const Mode& mode() const noexcept { return mode_; }
  const SampledFunction& correction() const noexcept { return correction_; }
  const GridPtr& grid() const noexcept { return correction_.grid(); }

  /// e0(s) - h(s), without the mu2 trace factor
  SampledFunction shape() const;
  /// E_n(x_endpoint, s)
  SampledFunction profile(int endpoint) const;

  /// int_0^T sum_x chi(x, s) E_n(x, s) ds
  double pair_profile(const BoundaryControl& chi) const;
  /// int_0^T sum_x f(x, T - s) E_n(x, s) ds
  double pair_control(const BoundaryControl& f) const;

 private:
  Mode mode_;
  SampledFunction correction_;
};

MomentKernel moment_kernels(const Mode& mode, const SampledFunction& H);

struct MomentEntry {
  Mode mode;
  double xi;
  double d_unit;       ///< free response at T for xi = 1
  double d;            ///< d_unit * xi
  SampledFunction H;   ///< resolvent of Z_n
  MomentKernel kernel;

  double target() const { return mode.mu2 * d; }  ///< c_n
};

struct MomentProblem {
  double T;
  GridPtr grid;
  ResolventTriple rt;
  bool memoryless;
  std::vector<MomentEntry> entries;
};

struct MomentOptions {
  double series_tol = 1e-14;
  bool use_series = false;  ///< H_n by the convolution series instead of the Volterra solve
};

/// Assembles d_n, H_n and E_n for each listed mode (all need mu2 > 0).
MomentProblem build_moment_problem(std::span<const Mode> modes, const ResolventTriple& rt,
                                   const std::function<double(int)>& xi, const MomentOptions& opts = {});

/// Diagonal map xi -> c: c_n = (-R(T) + M_n/mu_n^2) xi_n and its inverse.
std::vector<double> rescaled_targets(const AsymptoticReport& report, std::span<const double> xi);
std::vector<double> initial_data_for(const AsymptoticReport& report, std::span<const double> c);

/// chi(x, r) -> chi(x, r) - int_r^T G(s, r) chi(x, s) ds at each endpoint.
std::vector<BoundaryControl> reduce_scalar(std::span<const BoundaryControl> chi, const TriangularKernel& G);

/// Psi(r) = sum_x gamma_1 phi_n(x) chi_reduced(x, r)
SampledFunction trace_sum(const Mode& mode, const BoundaryControl& reduced);

/// int_0^T mu_n^2 exp(-mu_n^2 r) Psi(r) dr
double scalar_pairing(const Mode& mode, const BoundaryControl& reduced);

}  // namespace cgm
