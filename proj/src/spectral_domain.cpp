#include "cgm/spectral_domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgm/errors.hpp"

namespace cgm {

double Mode::lambda() const { return std::sqrt(lambda2); }

Mode make_mode(int n, double a) {
  if (n < 1) throw InvalidArgument("mode index must be >= 1");
  Mode m;
  m.n = n;
  const double npi = static_cast<double>(n) * kPi;
  m.lambda2 = npi * npi;
  m.mu2 = m.lambda2 - a;
  const double slope = std::sqrt(2.0) * npi;
  // phi_n'(1) = sqrt(2) n pi (-1)^n
  m.traces = {-slope, (n % 2 == 0) ? slope : -slope};
  return m;
}

ModeSet dirichlet_modes_1d(int count, double a) {
  if (count < 1) throw InvalidArgument("need at least one mode");
  ModeSet set;
  set.modes.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) set.modes.push_back(make_mode(n, a));
  // mu2 is increasing in n, so the first positive one is N_0.
  for (const auto& m : set.modes) {
    if (m.mu2 > 0.0) {
      set.first_positive = m.n;
      break;
    }
  }
  return set;
}

double eigenfunction(int n, double x) { return std::sqrt(2.0) * std::sin(n * kPi * x); }

double eigenfunction_d2(int n, double x) {
  const double npi = n * kPi;
  return -npi * npi * std::sqrt(2.0) * std::sin(npi * x);
}

BoundaryControl::BoundaryControl(SampledFunction at0, SampledFunction at1, std::array<bool, 2> active)
    : at0_(std::move(at0)), at1_(std::move(at1)), active_(active) {
  require_same_grid(at0_, at1_, "boundary control");
  for (int e = 0; e < 2; ++e) {
    if (!active_[e] && at(e).sup_norm() != 0.0) {
      throw InvalidArgument("inactive boundary endpoint carries nonzero data");
    }
  }
}

BoundaryControl BoundaryControl::zero(const GridPtr& grid) {
  return BoundaryControl(SampledFunction::zeros(grid), SampledFunction::zeros(grid), {false, false});
}

BoundaryControl BoundaryControl::single(int endpoint, SampledFunction data) {
  if (endpoint != 0 && endpoint != 1) throw InvalidArgument("endpoint must be 0 or 1");
  auto z = SampledFunction::zeros(data.grid());
  if (endpoint == 0) return BoundaryControl(std::move(data), std::move(z), {true, false});
  return BoundaryControl(std::move(z), std::move(data), {false, true});
}

double BoundaryControl::l2_norm_squared() const {
  double s = 0.0;
  for (int e = 0; e < 2; ++e) {
    const auto& f = at(e);
    std::vector<double> sq(f.size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = f[k] * f[k];
    s += integrate(SampledFunction(f.grid(), std::move(sq)));
  }
  return s;
}

SampledFunction trace_pairing(const Mode& mode, const BoundaryControl& f) {
  return mode.traces[0] * f.at(0) + mode.traces[1] * f.at(1);
}

TraceBounds trace_bound_check(std::span<const Mode> modes) {
  if (modes.empty()) throw InvalidArgument("trace_bound_check needs at least one mode");
  TraceBounds b{std::numeric_limits<double>::infinity(), 0.0, {}};
  b.per_mode.reserve(modes.size());
  for (const auto& m : modes) {
    const double l = m.lambda();
    double s = 0.0;
    for (double g : m.traces) s += (g / l) * (g / l);
    b.per_mode.push_back(s);
    b.lower = std::min(b.lower, s);
    b.upper = std::max(b.upper, s);
  }
  return b;
}

}  // namespace cgm
