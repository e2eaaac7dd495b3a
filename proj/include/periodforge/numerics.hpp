#pragma once

// Extended-precision real and complex values backed by GNU MPFR.
//
// Precision is always explicit: a Precision value is handed to every
// constructor, and the result of a binary operation carries the smaller of
// its operands' precisions. Nothing here reads ambient global state, so
// values can be shared between threads freely.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdlib>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "periodforge/errors.hpp"

namespace periodforge {

/// Working precision in decimal digits. Internally carries
/// ceil(P * log2(10)) + 16 guard bits.
class Precision {
 public:
  static constexpr int kMinDigits = 10;
  static constexpr int kGuardBits = 16;

  explicit Precision(int digits) : digits_(digits) {
    if (digits < kMinDigits) {
      throw ConfigError("precision must be at least " + std::to_string(kMinDigits) +
                        " decimal digits, got " + std::to_string(digits));
    }
  }

  int digits() const { return digits_; }
  mpfr_prec_t bits() const {
    return static_cast<mpfr_prec_t>(std::ceil(digits_ * 3.321928094887362)) + kGuardBits;
  }
  Precision doubled() const { return Precision(2 * digits_); }

  friend bool operator==(const Precision&, const Precision&) = default;

 private:
  int digits_;
};

class PrecReal {
 public:
  /// A value with no precision of its own yet; adopts its operand's
  /// precision on first assignment.
  PrecReal() { mpfr_init2(v_, MPFR_PREC_MIN); mpfr_set_zero(v_, 1); }
  explicit PrecReal(Precision p) { mpfr_init2(v_, p.bits()); mpfr_set_zero(v_, 1); }
  PrecReal(long x, Precision p) { mpfr_init2(v_, p.bits()); mpfr_set_si(v_, x, MPFR_RNDN); }
  PrecReal(int x, Precision p) : PrecReal(static_cast<long>(x), p) {}
  /// Exact conversion of the binary double.
  PrecReal(double x, Precision p) { mpfr_init2(v_, p.bits()); mpfr_set_d(v_, x, MPFR_RNDN); }
  /// Parses a decimal literal such as "-3.6676e-13" or ".9007". Throws ParseError.
  PrecReal(std::string_view text, Precision p) {
    mpfr_init2(v_, p.bits());
    std::string s(text);
    if (s.empty() || mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
      mpfr_clear(v_);
      throw ParseError("not a decimal number: '" + s + "'");
    }
  }

  PrecReal(const PrecReal& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  PrecReal(PrecReal&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  PrecReal& operator=(const PrecReal& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  PrecReal& operator=(PrecReal&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~PrecReal() { mpfr_clear(v_); }

  mpfr_prec_t bits() const { return mpfr_get_prec(v_); }
  bool hasPrecision() const { return bits() > MPFR_PREC_MIN; }
  /// Decimal digits carried, guard bits excluded.
  int digits() const {
    return static_cast<int>((bits() - Precision::kGuardBits) / 3.321928094887362);
  }

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

  double toDouble() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool isZero() const { return mpfr_zero_p(v_) != 0; }
  bool isFinite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  /// Binary exponent e with 0.5 <= |x| / 2^e < 1; meaningless for zero.
  long exponent2() const { return mpfr_get_exp(v_); }

  PrecReal& operator+=(const PrecReal& o) { adopt(o); mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  PrecReal& operator-=(const PrecReal& o) { adopt(o); mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  PrecReal& operator*=(const PrecReal& o) { adopt(o); mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  PrecReal& operator/=(const PrecReal& o) { adopt(o); mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
  PrecReal& operator+=(long x) { mpfr_add_si(v_, v_, x, MPFR_RNDN); return *this; }
  PrecReal& operator-=(long x) { mpfr_sub_si(v_, v_, x, MPFR_RNDN); return *this; }
  PrecReal& operator*=(long x) { mpfr_mul_si(v_, v_, x, MPFR_RNDN); return *this; }
  PrecReal& operator/=(long x) { mpfr_div_si(v_, v_, x, MPFR_RNDN); return *this; }
  PrecReal& operator*=(double x) { mpfr_mul_d(v_, v_, x, MPFR_RNDN); return *this; }
  PrecReal& operator/=(double x) { mpfr_div_d(v_, v_, x, MPFR_RNDN); return *this; }

  PrecReal operator-() const {
    PrecReal r(*this);
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
  }

  /// Result precision of combining two operands.
  static mpfr_prec_t combined(const PrecReal& a, const PrecReal& b) {
    if (!a.hasPrecision()) return b.bits();
    if (!b.hasPrecision()) return a.bits();
    return std::min(a.bits(), b.bits());
  }

  static PrecReal withBits(mpfr_prec_t bits) {
    PrecReal r;
    mpfr_set_prec(r.v_, bits);
    mpfr_set_zero(r.v_, 1);
    return r;
  }

  /// Integer constant carrying exactly `bits` bits.
  static PrecReal constant(long v, mpfr_prec_t bits) {
    PrecReal r = withBits(bits);
    mpfr_set_si(r.v_, v, MPFR_RNDN);
    return r;
  }

  /// Rounds in place to `p` if it carries more bits.
  void roundTo(Precision p) {
    if (bits() > p.bits()) mpfr_prec_round(v_, p.bits(), MPFR_RNDN);
  }

 private:
  void adopt(const PrecReal& o) {
    if (!hasPrecision()) {
      mpfr_prec_round(v_, o.bits(), MPFR_RNDN);
    } else if (o.hasPrecision() && o.bits() < bits()) {
      mpfr_prec_round(v_, o.bits(), MPFR_RNDN);
    }
  }

  mpfr_t v_;
};

/// The precision a value carries (never below the minimum).
inline Precision precisionOf(const PrecReal& x) { return Precision(std::max(x.digits(), Precision::kMinDigits)); }

/// Copy of x carrying exactly p's bits (rounded or zero-extended).
inline PrecReal convert(const PrecReal& x, Precision p) {
  PrecReal r(p);
  mpfr_set(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

namespace detail {
template <class Op>
PrecReal binary(const PrecReal& a, const PrecReal& b, Op op) {
  PrecReal r = PrecReal::withBits(PrecReal::combined(a, b));
  op(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return r;
}
template <class Op>
PrecReal unary(const PrecReal& a, Op op) {
  PrecReal r = PrecReal::withBits(a.bits());
  op(r.raw(), a.raw(), MPFR_RNDN);
  return r;
}
}  // namespace detail

inline PrecReal operator+(const PrecReal& a, const PrecReal& b) { return detail::binary(a, b, mpfr_add); }
inline PrecReal operator-(const PrecReal& a, const PrecReal& b) { return detail::binary(a, b, mpfr_sub); }
inline PrecReal operator*(const PrecReal& a, const PrecReal& b) { return detail::binary(a, b, mpfr_mul); }
inline PrecReal operator/(const PrecReal& a, const PrecReal& b) { return detail::binary(a, b, mpfr_div); }
inline PrecReal operator+(PrecReal&& a, const PrecReal& b) { a += b; return std::move(a); }
inline PrecReal operator-(PrecReal&& a, const PrecReal& b) { a -= b; return std::move(a); }
inline PrecReal operator*(PrecReal&& a, const PrecReal& b) { a *= b; return std::move(a); }
inline PrecReal operator/(PrecReal&& a, const PrecReal& b) { a /= b; return std::move(a); }

template <std::integral I>
PrecReal operator+(PrecReal a, I x) { a += static_cast<long>(x); return a; }
template <std::integral I>
PrecReal operator-(PrecReal a, I x) { a -= static_cast<long>(x); return a; }
template <std::integral I>
PrecReal operator*(PrecReal a, I x) { a *= static_cast<long>(x); return a; }
template <std::integral I>
PrecReal operator/(PrecReal a, I x) { a /= static_cast<long>(x); return a; }
template <std::integral I>
PrecReal operator+(I x, PrecReal a) { a += static_cast<long>(x); return a; }
template <std::integral I>
PrecReal operator*(I x, PrecReal a) { a *= static_cast<long>(x); return a; }
template <std::integral I>
PrecReal operator-(I x, const PrecReal& a) {
  PrecReal r = PrecReal::withBits(a.bits());
  mpfr_si_sub(r.raw(), static_cast<long>(x), a.raw(), MPFR_RNDN);
  return r;
}
template <std::integral I>
PrecReal operator/(I x, const PrecReal& a) {
  PrecReal r = PrecReal::withBits(a.bits());
  mpfr_si_div(r.raw(), static_cast<long>(x), a.raw(), MPFR_RNDN);
  return r;
}

inline int compare(const PrecReal& a, const PrecReal& b) { return mpfr_cmp(a.raw(), b.raw()); }
inline bool operator==(const PrecReal& a, const PrecReal& b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }
inline bool operator<(const PrecReal& a, const PrecReal& b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
inline bool operator>(const PrecReal& a, const PrecReal& b) { return mpfr_greater_p(a.raw(), b.raw()) != 0; }
inline bool operator<=(const PrecReal& a, const PrecReal& b) { return mpfr_lessequal_p(a.raw(), b.raw()) != 0; }
inline bool operator>=(const PrecReal& a, const PrecReal& b) { return mpfr_greaterequal_p(a.raw(), b.raw()) != 0; }
template <std::integral I>
bool operator<(const PrecReal& a, I x) { return mpfr_cmp_si(a.raw(), static_cast<long>(x)) < 0; }
template <std::integral I>
bool operator>(const PrecReal& a, I x) { return mpfr_cmp_si(a.raw(), static_cast<long>(x)) > 0; }
template <std::integral I>
bool operator<=(const PrecReal& a, I x) { return mpfr_cmp_si(a.raw(), static_cast<long>(x)) <= 0; }
template <std::integral I>
bool operator>=(const PrecReal& a, I x) { return mpfr_cmp_si(a.raw(), static_cast<long>(x)) >= 0; }
template <std::integral I>
bool operator==(const PrecReal& a, I x) { return mpfr_cmp_si(a.raw(), static_cast<long>(x)) == 0; }
inline bool operator<(const PrecReal& a, double x) { return mpfr_cmp_d(a.raw(), x) < 0; }
inline bool operator>(const PrecReal& a, double x) { return mpfr_cmp_d(a.raw(), x) > 0; }
inline bool operator<=(const PrecReal& a, double x) { return mpfr_cmp_d(a.raw(), x) <= 0; }
inline bool operator>=(const PrecReal& a, double x) { return mpfr_cmp_d(a.raw(), x) >= 0; }

inline PrecReal abs(const PrecReal& a) { return detail::unary(a, mpfr_abs); }
inline PrecReal sqrt(const PrecReal& a) { return detail::unary(a, mpfr_sqrt); }
inline PrecReal exp(const PrecReal& a) { return detail::unary(a, mpfr_exp); }
inline PrecReal expm1(const PrecReal& a) { return detail::unary(a, mpfr_expm1); }
inline PrecReal log(const PrecReal& a) { return detail::unary(a, mpfr_log); }
inline PrecReal log1p(const PrecReal& a) { return detail::unary(a, mpfr_log1p); }
inline PrecReal log10(const PrecReal& a) { return detail::unary(a, mpfr_log10); }
inline PrecReal sin(const PrecReal& a) { return detail::unary(a, mpfr_sin); }
inline PrecReal cos(const PrecReal& a) { return detail::unary(a, mpfr_cos); }
inline PrecReal sinh(const PrecReal& a) { return detail::unary(a, mpfr_sinh); }
inline PrecReal cosh(const PrecReal& a) { return detail::unary(a, mpfr_cosh); }
inline PrecReal tanh(const PrecReal& a) { return detail::unary(a, mpfr_tanh); }
inline PrecReal asinh(const PrecReal& a) { return detail::unary(a, mpfr_asinh); }
inline PrecReal atan2(const PrecReal& y, const PrecReal& x) { return detail::binary(y, x, mpfr_atan2); }
inline PrecReal hypot(const PrecReal& x, const PrecReal& y) { return detail::binary(x, y, mpfr_hypot); }
inline PrecReal pow(const PrecReal& x, const PrecReal& y) { return detail::binary(x, y, mpfr_pow); }
inline PrecReal pow(const PrecReal& x, long n) {
  PrecReal r = PrecReal::withBits(x.bits());
  mpfr_pow_si(r.raw(), x.raw(), n, MPFR_RNDN);
  return r;
}
inline PrecReal max(const PrecReal& a, const PrecReal& b) { return a < b ? b : a; }
inline PrecReal min(const PrecReal& a, const PrecReal& b) { return b < a ? b : a; }

inline PrecReal pi(Precision p) {
  PrecReal r(p);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}

/// 10^e at precision p.
inline PrecReal pow10(long e, Precision p) { return pow(PrecReal(10L, p), e); }

/// Scientific decimal rendering with `significant` digits, e.g. "-3.66747e-13".
inline std::string toString(const PrecReal& x, int significant) {
  if (x.isZero()) return "0";
  if (!x.isFinite()) return mpfr_nan_p(x.raw()) ? "nan" : (x.sign() < 0 ? "-inf" : "inf");
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", std::max(significant - 1, 0), x.raw());
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

/// Rendering with every digit the value carries.
inline std::string toString(const PrecReal& x) { return toString(x, x.digits()); }

inline std::ostream& operator<<(std::ostream& os, const PrecReal& x) {
  const auto prec = os.precision();
  return os << toString(x, prec > 0 ? static_cast<int>(prec) : 17);
}

/// Number of matching leading decimal digits between a and b (relative),
/// capped at the smaller precision.
inline double agreementDigits(const PrecReal& a, const PrecReal& b) {
  PrecReal diff = abs(a - b);
  PrecReal scale = max(abs(a), abs(b));
  if (diff.isZero()) return std::min(a.digits(), b.digits());
  if (scale.isZero()) return 0.0;
  return -log10(diff / scale).toDouble();
}

class PrecComplex {
 public:
  PrecComplex() = default;
  explicit PrecComplex(Precision p) : re_(p), im_(p) {}
  PrecComplex(PrecReal re, PrecReal im) : re_(std::move(re)), im_(std::move(im)) {}
  explicit PrecComplex(PrecReal re) : re_(std::move(re)), im_(PrecReal::withBits(re_.bits())) {}

  const PrecReal& re() const { return re_; }
  const PrecReal& im() const { return im_; }
  PrecReal& re() { return re_; }
  PrecReal& im() { return im_; }
  mpfr_prec_t bits() const { return PrecReal::combined(re_, im_); }

  static PrecComplex i(Precision p) { return {PrecReal(p), PrecReal(1L, p)}; }
  static PrecComplex constant(long re, mpfr_prec_t bits) {
    return {PrecReal::constant(re, bits), PrecReal::constant(0, bits)};
  }

  PrecComplex& operator+=(const PrecComplex& o) { re_ += o.re_; im_ += o.im_; return *this; }
  PrecComplex& operator-=(const PrecComplex& o) { re_ -= o.re_; im_ -= o.im_; return *this; }
  PrecComplex& operator*=(const PrecComplex& o) { *this = *this * o; return *this; }
  PrecComplex& operator/=(const PrecComplex& o) { *this = *this / o; return *this; }
  PrecComplex& operator*=(const PrecReal& s) { re_ *= s; im_ *= s; return *this; }
  PrecComplex& operator/=(const PrecReal& s) { re_ /= s; im_ /= s; return *this; }

  PrecComplex operator-() const { return {-re_, -im_}; }

  friend PrecComplex operator+(PrecComplex a, const PrecComplex& b) { a += b; return a; }
  friend PrecComplex operator-(PrecComplex a, const PrecComplex& b) { a -= b; return a; }
  friend PrecComplex operator*(const PrecComplex& a, const PrecComplex& b) {
    return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
  }
  friend PrecComplex operator/(const PrecComplex& a, const PrecComplex& b) {
    // Scale by the larger component to avoid spurious over/underflow.
    if (abs(b.re_) >= abs(b.im_)) {
      PrecReal r = b.im_ / b.re_;
      PrecReal d = b.re_ + b.im_ * r;
      return {(a.re_ + a.im_ * r) / d, (a.im_ - a.re_ * r) / d};
    }
    PrecReal r = b.re_ / b.im_;
    PrecReal d = b.re_ * r + b.im_;
    return {(a.re_ * r + a.im_) / d, (a.im_ * r - a.re_) / d};
  }
  friend PrecComplex operator*(PrecComplex a, const PrecReal& s) { a *= s; return a; }
  friend PrecComplex operator*(const PrecReal& s, PrecComplex a) { a *= s; return a; }
  friend PrecComplex operator/(PrecComplex a, const PrecReal& s) { a /= s; return a; }
  friend PrecComplex operator+(PrecComplex a, const PrecReal& s) { a.re_ += s; return a; }
  friend PrecComplex operator-(PrecComplex a, const PrecReal& s) { a.re_ -= s; return a; }

 private:
  PrecReal re_;
  PrecReal im_;
};

inline PrecComplex conj(const PrecComplex& z) { return {z.re(), -z.im()}; }
inline PrecReal abs(const PrecComplex& z) { return hypot(z.re(), z.im()); }
inline PrecReal arg(const PrecComplex& z) { return atan2(z.im(), z.re()); }
/// i * z
inline PrecComplex timesI(const PrecComplex& z) { return {-z.im(), z.re()}; }

/// Principal square root; a zero imaginary part is treated by its sign bit,
/// so sqrt(-r - 0i) = -i sqrt(r) as in C99.
inline PrecComplex sqrt(const PrecComplex& z) {
  if (z.re().isZero() && z.im().isZero()) return z;
  PrecReal m = abs(z);
  PrecReal t = sqrt((m + abs(z.re())) / 2);
  if (z.re() >= 0L) {
    return {t, z.im() / (t * 2)};
  }
  PrecReal u = abs(z.im()) / (t * 2);
  const bool negIm = mpfr_signbit(z.im().raw()) != 0;
  return {u, negIm ? -t : t};
}

inline PrecComplex exp(const PrecComplex& z) {
  PrecReal m = exp(z.re());
  return {m * cos(z.im()), m * sin(z.im())};
}

inline PrecComplex log(const PrecComplex& z) { return {log(abs(z)), arg(z)}; }

inline PrecComplex polar(const PrecReal& r, const PrecReal& theta) {
  return {r * cos(theta), r * sin(theta)};
}

inline std::ostream& operator<<(std::ostream& os, const PrecComplex& z) {
  return os << '(' << z.re() << ", " << z.im() << ')';
}

/// Runs `computation` with an explicit precision context. The callable
/// receives the Precision and creates its values from it.
template <class F>
auto withPrecision(int digits, F&& computation) {
  const Precision p(digits);
  return std::forward<F>(computation)(p);
}

}  // namespace periodforge
