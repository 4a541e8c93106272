#pragma once

// Minimal-norm biorthogonal families to decaying exponentials {exp(-mu_n^2 t)}
// and minimal-norm boundary controls for truncated moment problems.
//
// With G the Gram matrix of the family, the minimal biorthogonal element is
// psi_n = sum_k (G^{-1})_{nk} e_k and |psi_n|^2 = (G^{-1})_{nn}. Gram matrices
// of exponentials are violently ill-conditioned, so everything below runs in
// MPFR and escalates the mantissa width when residual checks fail.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgm/moment_assembler.hpp"
#include "cgm/multiprecision.hpp"

namespace cgm {

/// Integration range (0, T) or (0, inf).
class Horizon {
 public:
  static Horizon infinite() { return Horizon(std::nullopt); }
  static Horizon finite(double T);

  bool is_infinite() const noexcept { return !T_; }
  double T() const;
  std::string describe() const;

 private:
  explicit Horizon(std::optional<double> T) : T_(T) {}
  std::optional<double> T_;
};

/// Exponents mu_n^2, regenerated at whatever precision is current.
class ExponentFamily {
 public:
  /// mu_n^2 = n^2 pi^2 - shift for n = first, ..., first + count - 1.
  static ExponentFamily dirichlet(int count, double shift = 0.0, int first = 1);
  static ExponentFamily explicit_values(std::vector<double> mu2);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  /// Exponents at the current default precision. Throws on duplicates or nonpositive values.
  std::vector<mp_real> values() const;

 private:
  ExponentFamily() = default;
  std::vector<int> labels_;
  std::vector<double> explicit_;
  double shift_ = 0.0;
  bool dirichlet_ = false;
};

struct GramSystem {
  std::vector<mp_real> exponents;
  Horizon horizon = Horizon::infinite();
  long bits = 256;
  MpMatrix G;
};

/// G_ij = int e^{-(mu_i^2 + mu_j^2) t} dt over the horizon, at `bits` mantissa bits.
GramSystem gram(const ExponentFamily& family, const Horizon& horizon, long bits = 256);

struct BiorthOptions {
  long bits = 256;
  long max_bits = 1024;
  double residual_tol = 1e-20;  ///< on max |<psi_n, e_m> - delta_nm|
};

struct BiorthReport {
  std::vector<int> n;
  std::vector<double> norm2;     ///< (G^{-1})_nn
  std::vector<double> log_norm;  ///< natural log of |psi_n|
  std::vector<double> residual;  ///< max_m |<psi_n, e_m> - delta_nm|
  double max_residual = 0.0;
  long bits_used = 0;
  double log10_condition = 0.0;
  std::vector<std::string> warnings;
};

/// Throws PrecisionExhausted when max_bits does not reach residual_tol.
BiorthReport min_norm_biorth(const ExponentFamily& family, const Horizon& horizon, const BiorthOptions& opts = {});

/// Natural log of (C^{-1})_nn for the infinite-horizon Cauchy matrix, from the
/// closed form 2 mu_n^2 prod_{k != n} ((mu_k^2 + mu_n^2)/(mu_k^2 - mu_n^2))^2.
/// `positions` are 0-based family positions (all when empty).
std::vector<double> cauchy_log_diag(const ExponentFamily& family, std::span<const std::size_t> positions = {},
                                    long bits = 256);
std::vector<double> cauchy_diag(const ExponentFamily& family, std::span<const std::size_t> positions = {},
                                long bits = 256);

struct GrowthFit {
  double slope;
  double intercept;
  double rms_residual;
  std::size_t points;
};

/// Least-squares line through (x_i, y_i) for x in [lo, hi].
GrowthFit fit_line(std::span<const double> x, std::span<const double> y, double lo, double hi);

/// log|psi_n| against n over the upper half of the index range (needs >= 8 indices).
GrowthFit growth_fit(const BiorthReport& report);
/// Same over an explicit index window.
GrowthFit growth_fit(const BiorthReport& report, int n_lo, int n_hi);

struct ControlOptions {
  long bits = 256;
  long max_bits = 1024;
  double solve_tol = 1e-20;  ///< relative residual of the Gram solve
  std::array<bool, 2> endpoints{true, true};
};

struct ControlResult {
  int N_active = 0;
  double norm = 0.0;             ///< L^2(0,T; L^2(boundary)) norm of sum y_n E_n, as sqrt(y^T G y)
  double log_norm = 0.0;
  double moment_residual = 0.0;  ///< max_n |pairing - c_n| / max_n |c_n|
  double deficiency = 0.0;       ///< l2 norm of -w_n(T)/lambda_n^2 over the active modes after control
  double worst_case_cost = 0.0;  ///< sqrt(lambda_max(D G^{-1} D)), D = diag(c_n / xi_n)
  std::vector<double> coefficients;
  BoundaryControl control;
  long bits_used = 0;
  std::vector<std::string> warnings;
};

/// Minimal-norm control in the span of the first N_active moment kernels.
ControlResult min_norm_control(const MomentProblem& mp, int N_active, const ControlOptions& opts = {});

}  // namespace cgm
