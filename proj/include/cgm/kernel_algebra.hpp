#pragma once

// Convolution algebra on uniform time grids.
//
//   (f * g)(t) = int_0^t f(t - s) g(s) ds
//
// Every operand carries a shared pointer to the grid it was sampled on and
// binary operations require the *same* grid object; nothing is resampled.
// Quadrature is the product trapezoid rule. Convolutions against the
// exponential family e_k(t) = t^k/k! exp(-mu2 t) integrate the exponential
// factor exactly against the piecewise-linear interpolant of the remaining
// factor, so the error constant does not grow with mu2.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cgm {

class TimeGrid;
using GridPtr = std::shared_ptr<const TimeGrid>;

/// Uniform partition {0, dt, ..., T} of [0, T].
class TimeGrid {
 public:
  static GridPtr make(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }
  double node(std::size_t k) const noexcept {
    return k == steps_ ? horizon_ : static_cast<double>(k) * dt_;
  }

  /// Index of the node at time t, if t lies on the grid (relative tolerance in units of dt).
  std::optional<std::size_t> index_of(double t, double tol = 1e-9) const;

 private:
  TimeGrid(double horizon, std::size_t steps);
  double horizon_;
  std::size_t steps_;
  double dt_;
};

/// Real samples of a function of time at every node of a grid. Immutable.
class SampledFunction {
 public:
  SampledFunction(GridPtr grid, std::vector<double> values);

  static SampledFunction zeros(GridPtr grid);
  static SampledFunction constant(GridPtr grid, double c);
  static SampledFunction from(GridPtr grid, const std::function<double(double)>& f);

  const GridPtr& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  double sup_norm() const noexcept;
  bool shares_grid(const SampledFunction& other) const noexcept { return grid_ == other.grid_; }

  /// s -> f(T - s).
  SampledFunction reversed() const;

  SampledFunction operator-() const;
  friend SampledFunction operator+(const SampledFunction& a, const SampledFunction& b);
  friend SampledFunction operator-(const SampledFunction& a, const SampledFunction& b);
  friend SampledFunction operator*(double c, const SampledFunction& f);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// sup_k |a_k - b_k|
double sup_distance(const SampledFunction& a, const SampledFunction& b);

void require_same_grid(const SampledFunction& a, const SampledFunction& b, const char* op);

// ---------------------------------------------------------------------------
// Memory kernels

struct ZeroKernel {};
struct ConstantKernel {
  double c;
};
struct ExpTerm {
  double c;
  double b;
};
/// sum_i c_i exp(-b_i t)
struct ExpSumKernel {
  std::vector<ExpTerm> terms;
};
/// sum_i coeffs[i] t^i
struct PolynomialKernel {
  std::vector<double> coeffs;
};

/// Analytic C^1 memory kernel M(t) with its derivative.
class MemoryKernel {
 public:
  using Form = std::variant<ZeroKernel, ConstantKernel, ExpSumKernel, PolynomialKernel>;

  static MemoryKernel zero() { return MemoryKernel(ZeroKernel{}); }
  static MemoryKernel constant(double c) { return MemoryKernel(ConstantKernel{c}); }
  static MemoryKernel exp_sum(std::vector<ExpTerm> terms);
  static MemoryKernel polynomial(std::vector<double> coeffs);

  const Form& form() const noexcept { return form_; }
  double value(double t) const;
  double derivative(double t) const;
  bool is_zero() const;
  std::string describe() const;

  SampledFunction sample(const GridPtr& grid) const;
  SampledFunction sample_derivative(const GridPtr& grid) const;

  /// Closed-form resolvent R(t) and R'(t) where one is known (zero, constant,
  /// single exponential, linear polynomial M(t) = c t).
  struct ClosedForm {
    std::function<double(double)> R;
    std::function<double(double)> dR;
  };
  std::optional<ClosedForm> closed_form_resolvent() const;

 private:
  explicit MemoryKernel(Form f) : form_(std::move(f)) {}
  Form form_;
};

/// (a, R, L) with a = M(0), R the resolvent kernel of M and L = R'.
struct ResolventTriple {
  double a;
  SampledFunction R;
  SampledFunction L;
};

// ---------------------------------------------------------------------------
// Operations

/// Trapezoidal product quadrature of f * g at every node. Exactly commutative.
SampledFunction convolve(const SampledFunction& f, const SampledFunction& g);

/// f^{*k}, k >= 1.
SampledFunction conv_power(const SampledFunction& f, int k);

/// Solves y + K * y = f with the implicit trapezoid rule.
SampledFunction volterra_solve(const SampledFunction& kernel, const SampledFunction& forcing);

/// R = M - M * R, L = M' - M(0) R - M' * R.
ResolventTriple resolvent_of(const MemoryKernel& kernel, const GridPtr& grid);

/// Same for a tabulated kernel: L by central differences (one-sided at the ends).
ResolventTriple resolvent_of_samples(const SampledFunction& kernel_samples);

/// Second-order central differences, second-order one-sided formulas at the ends.
SampledFunction central_difference(const SampledFunction& f);

/// e_k(t) = t^k / k! exp(-mu2 t), evaluated pointwise.
SampledFunction e_k(const GridPtr& grid, double mu2, int k);

/// (f * e_k)(t) with the exponential weight integrated exactly.
SampledFunction convolve_exp(const SampledFunction& f, double mu2, int k = 0);

/// int_0^T g(s) exp(-mu2 s) ds with the same exponentially weighted rule.
double exp_weighted_integral(const SampledFunction& g, double mu2);

/// Trapezoid rule for int_0^T f(s) ds.
double integrate(const SampledFunction& f);

struct SeriesResult {
  SampledFunction H;
  int terms;  ///< index k of the last accumulated term
};

/// Resolvent of Z = -L * e_0 by the convolution series H = -sum_{k>=1} L^{*k} * e_{k-1}.
/// Stops once (sup|L| T)^k / k! < tol and k >= 3.
SeriesResult H_series(const SampledFunction& L, double mu2, double tol);

/// Resolvent of Z = -L * e_0 by solving H + Z * H = Z.
SampledFunction H_direct(const SampledFunction& L, double mu2);

/// Lower-triangular table G(t_i, s_j), s_j <= t_i.
class TriangularKernel {
 public:
  TriangularKernel(GridPtr grid, std::vector<double> packed);
  const GridPtr& grid() const noexcept { return grid_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return packed_[i * (i + 1) / 2 + j];
  }
  double sup_norm() const noexcept;
  int terms() const noexcept { return terms_; }
  void set_terms(int k) noexcept { terms_ = k; }

 private:
  GridPtr grid_;
  std::vector<double> packed_;
  int terms_ = 0;
};

/// G(t, s) = -sum_{k>=1} L^{*k}(t - s) s^k / k!, truncated like H_series.
TriangularKernel G_kernel(const SampledFunction& L, double tol);

/// int_0^{t_i} G(t_i, s) exp(-mu2 s) ds for every node t_i.
SampledFunction integrate_G_exp(const TriangularKernel& G, double mu2);

}  // namespace cgm
