#include "cgm/kernel_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cgm/errors.hpp"

namespace cgm {

namespace {

constexpr int kMaxSeriesTerms = 2000;

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

// Cell weights of the exponentially fitted rule on [0, dt]:
//   alpha = int_0^dt e^{-mu2 u} (1 - u/dt) du,  beta = int_0^dt e^{-mu2 u} u/dt du.
// Both equal dt * phi(z) with z = mu2 dt; series near z = 0 avoid cancellation.
struct CellWeights {
  double alpha;
  double beta;
};

CellWeights exp_cell_weights(double mu2, double dt) {
  const double z = mu2 * dt;
  double pa;
  double pb;
  if (std::abs(z) < 1e-2) {
    // phi_a = sum (-z)^j/(j+2)!, phi_b = sum (j+1)(-z)^j/(j+2)!
    double term = 1.0;
    double fact = 2.0;
    pa = 0.0;
    pb = 0.0;
    for (int j = 0; j < 8; ++j) {
      pa += term / fact;
      pb += (j + 1) * term / fact;
      term *= -z;
      fact *= (j + 3);
    }
  } else {
    const double em = std::expm1(-z);  // e^{-z} - 1
    pa = (z + em) / (z * z);
    pb = (-em - z * std::exp(-z)) / (z * z);
  }
  return {dt * pa, dt * pb};
}

SampledFunction make_like(const SampledFunction& f, std::vector<double> v) {
  return SampledFunction(f.grid(), std::move(v));
}

}  // namespace

// --- TimeGrid ---------------------------------------------------------------

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {}

GridPtr TimeGrid::make(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("time grid horizon must be positive and finite");
  }
  if (steps == 0) throw InvalidArgument("time grid needs at least one step");
  return GridPtr(new TimeGrid(horizon, steps));
}

std::optional<std::size_t> TimeGrid::index_of(double t, double tol) const {
  const double x = t / dt_;
  const double r = std::round(x);
  if (r < 0.0 || r > static_cast<double>(steps_) || std::abs(x - r) > tol) return std::nullopt;
  return static_cast<std::size_t>(r);
}

// --- SampledFunction --------------------------------------------------------

SampledFunction::SampledFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("sampled function without a grid");
  if (values_.size() != grid_->size()) {
    std::ostringstream os;
    os << "sample count " << values_.size() << " does not match grid node count " << grid_->size();
    throw InvalidArgument(os.str());
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericalError("non-finite sample value");
  }
}

SampledFunction SampledFunction::zeros(GridPtr grid) {
  const auto n = grid->size();
  return SampledFunction(std::move(grid), std::vector<double>(n, 0.0));
}

SampledFunction SampledFunction::constant(GridPtr grid, double c) {
  const auto n = grid->size();
  return SampledFunction(std::move(grid), std::vector<double>(n, c));
}

SampledFunction SampledFunction::from(GridPtr grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid->size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid->node(k));
  return SampledFunction(std::move(grid), std::move(v));
}

double SampledFunction::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SampledFunction SampledFunction::reversed() const {
  std::vector<double> v(values_.rbegin(), values_.rend());
  return SampledFunction(grid_, std::move(v));
}

SampledFunction SampledFunction::operator-() const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), [](double x) { return -x; });
  return SampledFunction(grid_, std::move(v));
}

SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
  require_same_grid(a, b, "addition");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] + b.values_[k];
  return SampledFunction(a.grid_, std::move(v));
}

SampledFunction operator-(const SampledFunction& a, const SampledFunction& b) {
  require_same_grid(a, b, "subtraction");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] - b.values_[k];
  return SampledFunction(a.grid_, std::move(v));
}

SampledFunction operator*(double c, const SampledFunction& f) {
  std::vector<double> v(f.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = c * f.values_[k];
  return SampledFunction(f.grid_, std::move(v));
}

double sup_distance(const SampledFunction& a, const SampledFunction& b) {
  require_same_grid(a, b, "sup_distance");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

void require_same_grid(const SampledFunction& a, const SampledFunction& b, const char* op) {
  if (!a.shares_grid(b)) throw GridMismatch(std::string(op) + " on functions sampled on different grids");
}

// --- MemoryKernel -----------------------------------------------------------

MemoryKernel MemoryKernel::exp_sum(std::vector<ExpTerm> terms) {
  for (const auto& t : terms) {
    if (!std::isfinite(t.c) || !std::isfinite(t.b)) throw InvalidArgument("exp_sum term must be finite");
  }
  return MemoryKernel(ExpSumKernel{std::move(terms)});
}

MemoryKernel MemoryKernel::polynomial(std::vector<double> coeffs) {
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw InvalidArgument("polynomial coefficient must be finite");
  }
  return MemoryKernel(PolynomialKernel{std::move(coeffs)});
}

double MemoryKernel::value(double t) const {
  struct V {
    double t;
    double operator()(const ZeroKernel&) const { return 0.0; }
    double operator()(const ConstantKernel& k) const { return k.c; }
    double operator()(const ExpSumKernel& k) const {
      double s = 0.0;
      for (const auto& term : k.terms) s += term.c * std::exp(-term.b * t);
      return s;
    }
    double operator()(const PolynomialKernel& k) const {
      double s = 0.0;
      for (auto it = k.coeffs.rbegin(); it != k.coeffs.rend(); ++it) s = s * t + *it;
      return s;
    }
  };
  return std::visit(V{t}, form_);
}

double MemoryKernel::derivative(double t) const {
  struct D {
    double t;
    double operator()(const ZeroKernel&) const { return 0.0; }
    double operator()(const ConstantKernel&) const { return 0.0; }
    double operator()(const ExpSumKernel& k) const {
      double s = 0.0;
      for (const auto& term : k.terms) s -= term.b * term.c * std::exp(-term.b * t);
      return s;
    }
    double operator()(const PolynomialKernel& k) const {
      double s = 0.0;
      for (std::size_t i = k.coeffs.size(); i-- > 1;) s = s * t + static_cast<double>(i) * k.coeffs[i];
      return s;
    }
  };
  return std::visit(D{t}, form_);
}

bool MemoryKernel::is_zero() const {
  struct Z {
    bool operator()(const ZeroKernel&) const { return true; }
    bool operator()(const ConstantKernel& k) const { return k.c == 0.0; }
    bool operator()(const ExpSumKernel& k) const {
      return std::all_of(k.terms.begin(), k.terms.end(), [](const ExpTerm& t) { return t.c == 0.0; });
    }
    bool operator()(const PolynomialKernel& k) const {
      return std::all_of(k.coeffs.begin(), k.coeffs.end(), [](double c) { return c == 0.0; });
    }
  };
  return std::visit(Z{}, form_);
}

std::string MemoryKernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  struct S {
    std::ostringstream& os;
    void operator()(const ZeroKernel&) const { os << "zero"; }
    void operator()(const ConstantKernel& k) const { os << "constant(" << k.c << ")"; }
    void operator()(const ExpSumKernel& k) const {
      os << "exp_sum(";
      for (std::size_t i = 0; i < k.terms.size(); ++i) {
        os << (i ? " + " : "") << k.terms[i].c << "*exp(-" << k.terms[i].b << "t)";
      }
      os << ")";
    }
    void operator()(const PolynomialKernel& k) const {
      os << "polynomial(";
      for (std::size_t i = 0; i < k.coeffs.size(); ++i) os << (i ? ", " : "") << k.coeffs[i];
      os << ")";
    }
  };
  std::visit(S{os}, form_);
  return os.str();
}

SampledFunction MemoryKernel::sample(const GridPtr& grid) const {
  return SampledFunction::from(grid, [this](double t) { return value(t); });
}

SampledFunction MemoryKernel::sample_derivative(const GridPtr& grid) const {
  return SampledFunction::from(grid, [this](double t) { return derivative(t); });
}

std::optional<MemoryKernel::ClosedForm> MemoryKernel::closed_form_resolvent() const {
  // Laplace transform: R^ = M^ / (1 + M^).
  if (is_zero()) return ClosedForm{[](double) { return 0.0; }, [](double) { return 0.0; }};
  if (const auto* k = std::get_if<ConstantKernel>(&form_)) {
    const double c = k->c;
    return ClosedForm{[c](double t) { return c * std::exp(-c * t); },
                      [c](double t) { return -c * c * std::exp(-c * t); }};
  }
  if (const auto* k = std::get_if<ExpSumKernel>(&form_); k && k->terms.size() == 1) {
    const double c = k->terms[0].c;
    const double r = k->terms[0].b + c;
    return ClosedForm{[c, r](double t) { return c * std::exp(-r * t); },
                      [c, r](double t) { return -r * c * std::exp(-r * t); }};
  }
  if (const auto* k = std::get_if<PolynomialKernel>(&form_)) {
    std::vector<double> c = k->coeffs;
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() == 2 && c[0] == 0.0) {
      // M = w^2 t  ->  R^ = w^2 / (s^2 + w^2)
      const double w2 = c[1];
      if (w2 > 0.0) {
        const double w = std::sqrt(w2);
        return ClosedForm{[w](double t) { return w * std::sin(w * t); },
                          [w](double t) { return w * w * std::cos(w * t); }};
      }
    }
    if (c.size() == 1) {
      const double cc = c[0];
      return ClosedForm{[cc](double t) { return cc * std::exp(-cc * t); },
                        [cc](double t) { return -cc * cc * std::exp(-cc * t); }};
    }
  }
  return std::nullopt;
}

// --- convolution ------------------------------------------------------------

SampledFunction convolve(const SampledFunction& f, const SampledFunction& g) {
  require_same_grid(f, g, "convolve");
  const auto a = f.values();
  const auto b = g.values();
  const std::size_t n = a.size();
  const double dt = f.grid()->dt();
  std::vector<double> out(n, 0.0);
  // Terms j and k - j are added as a pair so that swapping f and g produces
  // bitwise-identical sums.
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.5 * (a[k] * b[0] + a[0] * b[k]);
    std::size_t j = 1;
    for (; 2 * j < k; ++j) acc += a[k - j] * b[j] + a[j] * b[k - j];
    if (2 * j == k) acc += a[j] * b[j];
    out[k] = dt * acc;
  }
  return make_like(f, std::move(out));
}

SampledFunction conv_power(const SampledFunction& f, int k) {
  if (k < 1) throw InvalidArgument("conv_power requires k >= 1");
  SampledFunction p = f;
  for (int i = 2; i <= k; ++i) p = convolve(f, p);
  return p;
}

SampledFunction volterra_solve(const SampledFunction& kernel, const SampledFunction& forcing) {
  require_same_grid(kernel, forcing, "volterra_solve");
  const auto K = kernel.values();
  const auto f = forcing.values();
  const std::size_t n = f.size();
  const double dt = kernel.grid()->dt();
  const double diag = 1.0 + 0.5 * dt * K[0];
  if (std::abs(diag) <= 1e-12) {
    std::ostringstream os;
    os << "degenerate trapezoid step: 1 + (dt/2) K(0) = " << diag << " (dt = " << dt << ", K(0) = " << K[0]
       << "); increase the step count so that dt differs from " << -2.0 / K[0];
    throw DegenerateStep(os.str());
  }
  std::vector<double> y(n);
  y[0] = f[0];
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.5 * K[k] * y[0];
    for (std::size_t j = 1; j < k; ++j) acc += K[k - j] * y[j];
    y[k] = (f[k] - dt * acc) / diag;
  }
  return make_like(forcing, std::move(y));
}

ResolventTriple resolvent_of(const MemoryKernel& kernel, const GridPtr& grid) {
  const SampledFunction M = kernel.sample(grid);
  const SampledFunction dM = kernel.sample_derivative(grid);
  SampledFunction R = volterra_solve(M, M);
  // Differentiating R = M - M * R gives R' = M' - M(0) R - M' * R.
  SampledFunction L = dM - M[0] * R - convolve(dM, R);
  return {M[0], std::move(R), std::move(L)};
}

ResolventTriple resolvent_of_samples(const SampledFunction& kernel_samples) {
  SampledFunction R = volterra_solve(kernel_samples, kernel_samples);
  SampledFunction L = central_difference(R);
  return {kernel_samples[0], std::move(R), std::move(L)};
}

SampledFunction central_difference(const SampledFunction& f) {
  const auto v = f.values();
  const std::size_t n = v.size();
  if (n < 3) throw InvalidArgument("central_difference needs at least three nodes");
  const double h = f.grid()->dt();
  std::vector<double> d(n);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return make_like(f, std::move(d));
}

SampledFunction e_k(const GridPtr& grid, double mu2, int k) {
  if (k < 0) throw InvalidArgument("e_k requires k >= 0");
  std::vector<double> v(grid->size());
  const double lf = log_factorial(k);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double t = grid->node(j);
    if (k == 0) {
      v[j] = std::exp(-mu2 * t);
    } else if (t == 0.0) {
      v[j] = 0.0;
    } else {
      v[j] = std::exp(k * std::log(t) - lf - mu2 * t);
    }
  }
  return SampledFunction(grid, std::move(v));
}

SampledFunction convolve_exp(const SampledFunction& f, double mu2, int k) {
  if (k < 0) throw InvalidArgument("convolve_exp requires k >= 0");
  const auto& grid = f.grid();
  const std::size_t n = f.size();
  const double dt = grid->dt();
  const auto [alpha, beta] = exp_cell_weights(mu2, dt);
  const double lf = log_factorial(k);

  // node weights: wa_j multiplies the left end of cell j, wb_j the right end of cell j-1
  std::vector<double> wa(n);
  std::vector<double> wb(n);
  std::vector<double> poly(n);
  std::vector<double> ex(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = grid->node(j);
    ex[j] = std::exp(-mu2 * s);
    poly[j] = k == 0 ? 1.0 : (s == 0.0 ? 0.0 : std::exp(k * std::log(s) - lf));
  }
  for (std::size_t j = 0; j < n; ++j) {
    wa[j] = alpha * ex[j] * poly[j];
    wb[j] = j ? beta * ex[j - 1] * poly[j] : 0.0;
  }
  const auto v = f.values();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    double acc = wb[i] * v[0];
    for (std::size_t j = 0; j < i; ++j) acc += (wa[j] + wb[j]) * v[i - j];
    out[i] = acc;
  }
  return make_like(f, std::move(out));
}

double exp_weighted_integral(const SampledFunction& g, double mu2) {
  const auto& grid = g.grid();
  const auto [alpha, beta] = exp_cell_weights(mu2, grid->dt());
  const auto v = g.values();
  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < v.size(); ++c) {
    acc += std::exp(-mu2 * grid->node(c)) * (alpha * v[c] + beta * v[c + 1]);
  }
  return acc;
}

double integrate(const SampledFunction& f) {
  const auto v = f.values();
  double acc = 0.5 * (v.front() + v.back());
  for (std::size_t k = 1; k + 1 < v.size(); ++k) acc += v[k];
  return acc * f.grid()->dt();
}

// --- resolvents of Z_n --------------------------------------------------------

SeriesResult H_series(const SampledFunction& L, double mu2, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("H_series tolerance must be positive");
  if (!(mu2 > 0.0)) throw InvalidArgument("H_series requires mu2 > 0");
  const double x = L.sup_norm() * L.grid()->horizon();
  std::vector<double> acc(L.size(), 0.0);
  SampledFunction power = L;
  int k = 1;
  for (;; ++k) {
    const SampledFunction term = convolve_exp(power, mu2, k - 1);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] -= term[j];
    const double bound = x == 0.0 ? 0.0 : std::exp(k * std::log(x) - log_factorial(k));
    if (k >= 3 && bound < tol) break;
    if (k >= kMaxSeriesTerms) throw NumericalError("H_series did not reach the truncation bound");
    power = convolve(L, power);
  }
  return {SampledFunction(L.grid(), std::move(acc)), k};
}

SampledFunction H_direct(const SampledFunction& L, double mu2) {
  if (!(mu2 > 0.0)) throw InvalidArgument("H_direct requires mu2 > 0");
  const SampledFunction Z = -convolve_exp(L, mu2, 0);
  return volterra_solve(Z, Z);
}

// --- G(t, s) ------------------------------------------------------------------

TriangularKernel::TriangularKernel(GridPtr grid, std::vector<double> packed)
    : grid_(std::move(grid)), packed_(std::move(packed)) {
  const std::size_t n = grid_->size();
  if (packed_.size() != n * (n + 1) / 2) throw InvalidArgument("triangular kernel size mismatch");
}

double TriangularKernel::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : packed_) m = std::max(m, std::abs(v));
  return m;
}

TriangularKernel G_kernel(const SampledFunction& L, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("G_kernel tolerance must be positive");
  const auto& grid = L.grid();
  const std::size_t n = grid->size();
  const double x = L.sup_norm() * grid->horizon();
  std::vector<double> packed(n * (n + 1) / 2, 0.0);
  std::vector<double> sk(n);
  SampledFunction power = L;
  int k = 1;
  for (;; ++k) {
    const double lf = log_factorial(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double s = grid->node(j);
      sk[j] = s == 0.0 ? 0.0 : std::exp(k * std::log(s) - lf);
    }
    const auto p = power.values();
    for (std::size_t i = 0; i < n; ++i) {
      double* row = packed.data() + i * (i + 1) / 2;
      for (std::size_t j = 0; j <= i; ++j) row[j] -= p[i - j] * sk[j];
    }
    const double bound = x == 0.0 ? 0.0 : std::exp(k * std::log(x) - lf);
    if (k >= 3 && bound < tol) break;
    if (k >= kMaxSeriesTerms) throw NumericalError("G_kernel did not reach the truncation bound");
    power = convolve(L, power);
  }
  TriangularKernel G(grid, std::move(packed));
  G.set_terms(k);
  return G;
}

SampledFunction integrate_G_exp(const TriangularKernel& G, double mu2) {
  const auto& grid = G.grid();
  const std::size_t n = grid->size();
  const auto [alpha, beta] = exp_cell_weights(mu2, grid->dt());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < i; ++c) {
      acc += std::exp(-mu2 * grid->node(c)) * (alpha * G(i, c) + beta * G(i, c + 1));
    }
    out[i] = acc;
  }
  return SampledFunction(grid, std::move(out));
}

}  // namespace cgm
