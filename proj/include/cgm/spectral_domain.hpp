#pragma once

// Dirichlet eigenpairs of -d^2/dx^2 on (0, 1):
//   phi_n(x) = sqrt(2) sin(n pi x),  lambda_n^2 = n^2 pi^2.
// Normal derivatives use the outward normal: -d/dx at x = 0, +d/dx at x = 1.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cgm/kernel_algebra.hpp"

namespace cgm {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Mode {
  int n = 0;
  double lambda2 = 0.0;              ///< n^2 pi^2
  double mu2 = 0.0;                  ///< lambda2 - a
  std::array<double, 2> traces{};    ///< outward normal derivative of phi_n at x = 0, 1

  double lambda() const;
};

Mode make_mode(int n, double a);

struct ModeSet {
  std::vector<Mode> modes;
  /// Smallest index with mu2 > 0 (N_0). Empty when no listed mode qualifies.
  std::optional<int> first_positive;
};

ModeSet dirichlet_modes_1d(int count, double a);

double eigenfunction(int n, double x);
double eigenfunction_d2(int n, double x);

/// Boundary data f(x, t) at x = 0 and x = 1.
class BoundaryControl {
 public:
  BoundaryControl(SampledFunction at0, SampledFunction at1, std::array<bool, 2> active = {true, true});

  static BoundaryControl zero(const GridPtr& grid);
  /// Data at one endpoint, zero at the other (which is marked inactive).
  static BoundaryControl single(int endpoint, SampledFunction data);

  const SampledFunction& at(int endpoint) const { return endpoint == 0 ? at0_ : at1_; }
  const std::array<bool, 2>& active() const noexcept { return active_; }
  const GridPtr& grid() const noexcept { return at0_.grid(); }

  /// sum over endpoints of int_0^T f(x, t)^2 dt
  double l2_norm_squared() const;

 private:
  SampledFunction at0_;
  SampledFunction at1_;
  std::array<bool, 2> active_;
};

/// g_n(t) = sum_{x in {0,1}} (d phi_n / d nu)(x) f(x, t)
SampledFunction trace_pairing(const Mode& mode, const BoundaryControl& f);

struct TraceBounds {
  double lower;
  double upper;
  std::vector<double> per_mode;  ///< sum_x |gamma_1 phi_n(x) / lambda_n|^2
};

TraceBounds trace_bound_check(std::span<const Mode> modes);

}  // namespace cgm
