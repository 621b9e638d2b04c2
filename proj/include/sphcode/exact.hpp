#pragma once

// Exact scalars: arbitrary-precision rationals and elements of a real
// quadratic field Q(sqrt(k)). Both are ordered fields, which is all the
// lattice code and the exact simplex need.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sphcode {

using Rational = mpq_class;

Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);

/// a + b*sqrt(k), with k square-free and k > 1 whenever b != 0.
///
/// Values with b == 0 are plain rationals and mix freely with any field.
/// Mixing two genuinely irrational values with different k throws.
class Quad {
 public:
  Quad() = default;
  Quad(long value) : a_(value) {}  // NOLINT(google-explicit-constructor)
  Quad(Rational a) : a_(std::move(a)) { a_.canonicalize(); }  // NOLINT
  Quad(Rational a, Rational b, long radicand);

  /// sqrt(r) when it lies in some quadratic field, i.e. always for r >= 0
  /// small enough to factor; nullopt when r < 0 or factoring gives up.
  static std::optional<Quad> sqrt_of(const Rational& r);

  /// Parses "p/q", "-3", "0.25", "p/q+r/s*sqrt(k)", "sqrt(k)", "r*sqrt(k)".
  static Quad parse(std::string_view text);

  const Rational& rational_part() const noexcept { return a_; }
  const Rational& surd_part() const noexcept { return b_; }
  long radicand() const noexcept { return k_; }
  bool is_rational() const noexcept { return b_ == 0; }
  bool is_zero() const noexcept { return a_ == 0 && b_ == 0; }

  int sign() const;
  double to_double() const;
  std::string str() const;

  /// Largest integer <= *this, exact.
  long floor() const;
  Quad conjugate() const;

  Quad operator-() const;
  Quad& operator+=(const Quad& o);
  Quad& operator-=(const Quad& o);
  Quad& operator*=(const Quad& o);
  Quad& operator/=(const Quad& o);

  friend Quad operator+(Quad x, const Quad& y) { return x += y; }
  friend Quad operator-(Quad x, const Quad& y) { return x -= y; }
  friend Quad operator*(Quad x, const Quad& y) { return x *= y; }
  friend Quad operator/(Quad x, const Quad& y) { return x /= y; }

  friend bool operator==(const Quad& x, const Quad& y) { return (x - y).sign() == 0; }
  friend bool operator<(const Quad& x, const Quad& y) { return (x - y).sign() < 0; }
  friend bool operator>(const Quad& x, const Quad& y) { return y < x; }
  friend bool operator<=(const Quad& x, const Quad& y) { return !(y < x); }
  friend bool operator>=(const Quad& x, const Quad& y) { return !(x < y); }

 private:
  void normalize();
  long join_radicand(const Quad& o) const;

  Rational a_{0};
  Rational b_{0};
  long k_ = 1;
};

/// Splits n > 0 as s^2 * f with f square-free. Returns nullopt if n has a
/// prime factor beyond the trial-division limit.
std::optional<std::pair<std::uint64_t, std::uint64_t>> square_free_split(std::uint64_t n);

}  // namespace sphcode
