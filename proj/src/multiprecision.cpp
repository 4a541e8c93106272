#include "cgm/multiprecision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgm/errors.hpp"

namespace cgm {

long precision_bits(const mp_real& x) { return static_cast<long>(mpfr_get_prec(x.backend().data())); }

PrecisionScope::PrecisionScope(long bits) : bits_(bits), saved_digits10_(mp_real::default_precision()) {
  if (bits < 53) throw InvalidArgument("precision below 53 bits");
  // digits10 -> bits rounds up, so ask for the largest digits10 that fits.
  const auto d10 = static_cast<unsigned>(std::floor(static_cast<double>(bits) * 0.30102999566398120));
  mp_real::default_precision(d10);
}

PrecisionScope::~PrecisionScope() { mp_real::default_precision(saved_digits10_); }

MpMatrix::MpMatrix(std::size_t n) : n_(n), a_(n * n, mp_real(0)) {}

MpMatrix MpMatrix::identity(std::size_t n) {
  MpMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

MpMatrix MpMatrix::operator*(const MpMatrix& b) const {
  if (b.n_ != n_) throw InvalidArgument("matrix size mismatch");
  MpMatrix c(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k) {
      const mp_real& aik = (*this)(i, k);
      for (std::size_t j = 0; j < n_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

std::vector<mp_real> MpMatrix::operator*(const std::vector<mp_real>& x) const {
  if (x.size() != n_) throw InvalidArgument("vector size mismatch");
  std::vector<mp_real> y(n_, mp_real(0));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

mp_real MpMatrix::max_abs_diff(const MpMatrix& b) const {
  if (b.n_ != n_) throw InvalidArgument("matrix size mismatch");
  mp_real m = 0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    mp_real d = abs(a_[k] - b.a_[k]);
    if (d > m) m = d;
  }
  return m;
}

std::optional<Cholesky> Cholesky::factor(const MpMatrix& a) {
  const std::size_t n = a.size();
  MpMatrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    mp_real d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0)) return std::nullopt;
    l(j, j) = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      mp_real s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return Cholesky(std::move(l));
}

std::vector<mp_real> Cholesky::solve(std::vector<mp_real> b) const {
  const std::size_t n = l_.size();
  if (b.size() != n) throw InvalidArgument("right-hand side size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l_(i, k) * b[k];
    b[i] /= l_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= l_(k, i) * b[k];
    b[i] /= l_(i, i);
  }
  return b;
}

MpMatrix Cholesky::inverse() const {
  const std::size_t n = l_.size();
  MpMatrix inv(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<mp_real> e(n, mp_real(0));
    e[j] = 1;
    auto x = solve(std::move(e));
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}

double Cholesky::log10_condition_bound() const {
  mp_real lo = l_(0, 0), hi = l_(0, 0);
  for (std::size_t i = 1; i < l_.size(); ++i) {
    lo = std::min(lo, l_(i, i));
    hi = std::max(hi, l_(i, i));
  }
  return 2.0 * static_cast<double>(log10(hi / lo));
}

double log10_diagonal_spread(const MpMatrix& a) {
  mp_real lo = abs(a(0, 0)), hi = abs(a(0, 0));
  for (std::size_t i = 1; i < a.size(); ++i) {
    lo = std::min<mp_real>(lo, abs(a(i, i)));
    hi = std::max<mp_real>(hi, abs(a(i, i)));
  }
  if (!(lo > 0)) return std::numeric_limits<double>::infinity();
  return static_cast<double>(log10(hi / lo));
}

}  // namespace cgm
