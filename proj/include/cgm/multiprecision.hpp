#pragma once

// Variable-precision reals on top of MPFR and a small dense symmetric solver.
//
// Precision is a thread-wide default: values created while a PrecisionScope is
// alive carry its mantissa width. Keep every extended computation inside one
// scope and leave it through double or string conversions.

#include <boost/multiprecision/mpfr.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace cgm {

using mp_real = boost::multiprecision::mpfr_float;

/// Mantissa bits actually carried by x.
long precision_bits(const mp_real& x);

class PrecisionScope {
 public:
  explicit PrecisionScope(long bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

  long bits() const noexcept { return bits_; }

 private:
  long bits_;
  unsigned saved_digits10_;
};

/// Row-major square matrix of mp_real.
class MpMatrix {
 public:
  explicit MpMatrix(std::size_t n = 0);

  std::size_t size() const noexcept { return n_; }
  mp_real& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const mp_real& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  static MpMatrix identity(std::size_t n);
  MpMatrix operator*(const MpMatrix& b) const;
  std::vector<mp_real> operator*(const std::vector<mp_real>& x) const;

  /// max |a_ij - b_ij|
  mp_real max_abs_diff(const MpMatrix& b) const;

 private:
  std::size_t n_;
  std::vector<mp_real> a_;
};

/// Lower Cholesky factor of a symmetric matrix; empty when a pivot is not positive.
class Cholesky {
 public:
  static std::optional<Cholesky> factor(const MpMatrix& a);

  std::vector<mp_real> solve(std::vector<mp_real> b) const;
  MpMatrix inverse() const;

  /// 2 log10(max L_ii / min L_ii), a lower bound on log10 cond(A).
  double log10_condition_bound() const;

 private:
  explicit Cholesky(MpMatrix l) : l_(std::move(l)) {}
  MpMatrix l_;
};

/// Diagonal-ratio estimate used when the factorization itself fails.
double log10_diagonal_spread(const MpMatrix& a);

}  // namespace cgm
