#pragma once

// Complex arithmetic over an arbitrary real type. std::complex is only
// specified for the builtin floating types, so mpfr-backed work goes
// through basic_complex instead.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdlib>
#include <string>
#include <type_traits>

#include "core.hpp"

namespace mincap {

namespace bmp = boost::multiprecision;

/// Runtime-precision binary float, expression templates off so `auto` is safe.
using mp_real = bmp::number<bmp::mpfr_float_backend<0>, bmp::et_off>;

template <class R>
class basic_complex {
 public:
  using value_type = R;

  basic_complex() : re_(0), im_(0) {}
  basic_complex(const R& re) : re_(re), im_(0) {}  // NOLINT: implicit like std::complex
  basic_complex(const R& re, const R& im) : re_(re), im_(im) {}
  template <class T, class = std::enable_if_t<std::is_arithmetic_v<T>>>
  basic_complex(T re) : re_(re), im_(0) {}  // NOLINT
  explicit basic_complex(complex_t z) : re_(z.real()), im_(z.imag()) {}

  const R& real() const { return re_; }
  const R& imag() const { return im_; }

  basic_complex& operator+=(const basic_complex& o) { re_ += o.re_; im_ += o.im_; return *this; }
  basic_complex& operator-=(const basic_complex& o) { re_ -= o.re_; im_ -= o.im_; return *this; }
  basic_complex& operator*=(const basic_complex& o) { return *this = *this * o; }
  basic_complex& operator/=(const basic_complex& o) { return *this = *this / o; }

  friend basic_complex operator+(const basic_complex& a, const basic_complex& b) { return {a.re_ + b.re_, a.im_ + b.im_}; }
  friend basic_complex operator-(const basic_complex& a, const basic_complex& b) { return {a.re_ - b.re_, a.im_ - b.im_}; }
  friend basic_complex operator-(const basic_complex& a) { return {-a.re_, -a.im_}; }
  friend basic_complex operator*(const basic_complex& a, const basic_complex& b) {
    return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
  }
  friend basic_complex operator*(const basic_complex& a, const R& s) { return {a.re_ * s, a.im_ * s}; }
  friend basic_complex operator*(const R& s, const basic_complex& a) { return {a.re_ * s, a.im_ * s}; }
  friend basic_complex operator/(const basic_complex& a, const R& s) { return {a.re_ / s, a.im_ / s}; }
  friend basic_complex operator/(const basic_complex& a, const basic_complex& b) {
    // Smith's algorithm keeps intermediate magnitudes in range.
    using std::abs;
    if (abs(b.re_) >= abs(b.im_)) {
      const R r = b.im_ / b.re_, d = b.re_ + b.im_ * r;
      return {(a.re_ + a.im_ * r) / d, (a.im_ - a.re_ * r) / d};
    }
    const R r = b.re_ / b.im_, d = b.im_ + b.re_ * r;
    return {(a.re_ * r + a.im_) / d, (a.im_ * r - a.re_) / d};
  }
  friend bool operator==(const basic_complex& a, const basic_complex& b) { return a.re_ == b.re_ && a.im_ == b.im_; }

  friend R real(const basic_complex& z) { return z.re_; }
  friend R imag(const basic_complex& z) { return z.im_; }
  friend basic_complex conj(const basic_complex& z) { return {z.re_, -z.im_}; }
  friend R norm(const basic_complex& z) { return z.re_ * z.re_ + z.im_ * z.im_; }
  friend R abs(const basic_complex& z) {
    using std::hypot;
    return hypot(z.re_, z.im_);
  }
  friend R arg(const basic_complex& z) {
    using std::atan2;
    return atan2(z.im_, z.re_);
  }
  friend basic_complex sqrt(const basic_complex& z) {
    using std::abs;
    using std::sqrt;
    if (z.re_ == 0 && z.im_ == 0) return {};
    const R m = abs(z);
    R t = sqrt((m + abs(z.re_)) / 2);
    if (z.re_ >= 0) return {t, z.im_ / (2 * t)};
    return {abs(z.im_) / (2 * t), z.im_ < 0 ? R(-t) : t};
  }
  friend basic_complex exp(const basic_complex& z) {
    using std::cos;
    using std::exp;
    using std::sin;
    const R e = exp(z.re_);
    return {e * cos(z.im_), e * sin(z.im_)};
  }
  friend basic_complex log(const basic_complex& z) {
    using std::log;
    return {log(abs(z)), arg(z)};
  }
  friend basic_complex pow(const basic_complex& z, const R& e) {
    if (z.re_ == 0 && z.im_ == 0) return {};
    return exp(log(z) * e);
  }

 private:
  R re_, im_;
};

using mp_complex = basic_complex<mp_real>;

template <class C>
struct complex_traits;
template <class T>
struct complex_traits<std::complex<T>> {
  using real_type = T;
  static T epsilon() { return std::numeric_limits<T>::epsilon(); }
};
template <>
struct complex_traits<mp_complex> {
  using real_type = mp_real;
  static mp_real epsilon() {
    return bmp::pow(mp_real(10), -static_cast<int>(mp_real::default_precision()));
  }
};

template <class C>
using real_of = typename complex_traits<C>::real_type;

template <class C>
C from_complex(complex_t z) {
  if constexpr (std::is_same_v<C, complex_t>) return z;
  else return C(z);
}

template <class C>
complex_t to_complex(const C& z) {
  if constexpr (std::is_same_v<C, complex_t>) return z;
  else return {static_cast<double>(real(z)), static_cast<double>(imag(z))};
}

/// Sets the default mpfr precision (decimal digits) for the lifetime of the
/// object and restores the previous value afterwards.
class precision_scope {
 public:
  explicit precision_scope(unsigned digits) : saved_(mp_real::default_precision()) {
    mp_real::default_precision(digits);
  }
  ~precision_scope() { mp_real::default_precision(saved_); }
  precision_scope(const precision_scope&) = delete;
  precision_scope& operator=(const precision_scope&) = delete;

 private:
  unsigned saved_;
};

/// Default working digits: MINCAP_DIGITS if set and sane, else `fallback`.
inline unsigned default_digits(unsigned fallback = 16) {
  if (const char* env = std::getenv("MINCAP_DIGITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 16 && v <= 10000) return static_cast<unsigned>(v);
  }
  return fallback;
}

}  // namespace mincap
