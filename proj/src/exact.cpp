#include "sphcode/exact.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <utility>

#include "sphcode/error.hpp"

namespace sphcode {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool accept(char c) {
    skip_space();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view w) {
    skip_space();
    if (text_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " in '" + std::string(text_) + "'", 1, static_cast<int>(pos_) + 1);
  }

  std::string digits() {
    std::string out;
    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) out += text_[pos_++];
    return out;
  }

  // Unsigned decimal literal: digits [. digits] [e [+-] digits]
  Rational unsigned_decimal() {
    skip_space();
    std::string whole = digits();
    std::string frac;
    if (peek() == '.') {
      ++pos_;
      frac = digits();
    }
    if (whole.empty() && frac.empty()) fail("expected a number");
    mpz_class num(whole + frac, 10);
    mpz_class den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    if (peek() == 'e' || peek() == 'E') {
      ++pos_;
      bool neg = false;
      if (peek() == '+' || peek() == '-') neg = text_[pos_++] == '-';
      std::string e = digits();
      if (e.empty()) fail("bad exponent");
      long ex = std::stol(e);
      if (ex > 4000) fail("exponent too large");
      mpz_class p = 1;
      for (long i = 0; i < ex; ++i) p *= 10;
      if (neg)
        den *= p;
      else
        num *= p;
    }
    Rational r(num, den);
    r.canonicalize();
    return r;
  }

  Rational unsigned_rational() {
    Rational r = unsigned_decimal();
    skip_space();
    if (peek() == '/') {
      ++pos_;
      Rational d = unsigned_decimal();
      if (d == 0) fail("zero denominator");
      r /= d;
    }
    return r;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

bool fits_u64(const mpz_class& z) {
  return z >= 0 && mpz_sizeinbase(z.get_mpz_t(), 2) <= 63;
}

std::uint64_t to_u64(const mpz_class& z) {
  return static_cast<std::uint64_t>(std::stoull(z.get_str()));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  Cursor c(text);
  bool neg = false;
  c.skip_space();
  if (c.accept('-'))
    neg = true;
  else
    c.accept('+');
  Rational r = c.unsigned_rational();
  c.skip_space();
  if (!c.done()) c.fail("trailing characters");
  return neg ? Rational(-r) : r;
}

std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> square_free_split(std::uint64_t n) {
  if (n == 0) return std::pair<std::uint64_t, std::uint64_t>{0, 1};
  constexpr std::uint64_t kTrialLimit = 1u << 20;
  std::uint64_t square = 1;
  std::uint64_t free = 1;
  for (std::uint64_t p = 2; p <= kTrialLimit && p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) square *= p;
    if (e % 2) free *= p;
  }
  if (n > 1) {
    // Whatever remains is prime if it is below the square of the trial limit.
    if (n > kTrialLimit * kTrialLimit) return std::nullopt;
    free *= n;
  }
  return std::pair{square, free};
}

Quad::Quad(Rational a, Rational b, long radicand) : a_(std::move(a)), b_(std::move(b)), k_(radicand) {
  if (k_ < 1) throw DomainError("quadratic field radicand must be positive");
  a_.canonicalize();
  b_.canonicalize();
  normalize();
}

void Quad::normalize() {
  if (b_ == 0) {
    k_ = 1;
    return;
  }
  auto split = square_free_split(static_cast<std::uint64_t>(k_));
  if (!split) throw DomainError("radicand too large to factor");
  auto [s, f] = *split;
  b_ *= static_cast<unsigned long>(s);
  k_ = static_cast<long>(f);
  if (k_ == 1) {
    a_ += b_;
    b_ = 0;
  }
}

std::optional<Quad> Quad::sqrt_of(const Rational& r) {
  if (r < 0) return std::nullopt;
  if (r == 0) return Quad(0);
  mpz_class pq = r.get_num() * r.get_den();
  if (!fits_u64(pq)) return std::nullopt;
  auto split = square_free_split(to_u64(pq));
  if (!split) return std::nullopt;
  auto [s, f] = *split;
  Rational coef(mpz_class(static_cast<unsigned long>(s)), r.get_den());
  coef.canonicalize();
  if (f == 1) return Quad(coef);
  return Quad(0, coef, static_cast<long>(f));
}

Quad Quad::parse(std::string_view text) {
  Cursor c(text);
  Quad total;
  bool first = true;
  while (true) {
    c.skip_space();
    if (c.done()) {
      if (first) c.fail("empty number");
      break;
    }
    bool neg = false;
    if (c.accept('-')) {
      neg = true;
    } else if (!c.accept('+') && !first) {
      c.fail("expected '+' or '-'");
    }
    Rational coef = 1;
    long radicand = 1;
    c.skip_space();
    if (!c.accept_word("sqrt")) {
      coef = c.unsigned_rational();
      if (c.accept('*')) {
        if (!c.accept_word("sqrt")) c.fail("expected sqrt");
        radicand = 0;
      }
    } else {
      radicand = 0;
    }
    if (radicand == 0) {
      if (!c.accept('(')) c.fail("expected '('");
      c.skip_space();
      std::string k = c.digits();
      if (k.empty()) c.fail("expected integer radicand");
      if (!c.accept(')')) c.fail("expected ')'");
      radicand = std::stol(k);
      if (radicand < 1) c.fail("radicand must be positive");
    }
    if (neg) coef = -coef;
    total += radicand == 1 ? Quad(coef) : Quad(0, coef, radicand);
    first = false;
  }
  return total;
}

long Quad::join_radicand(const Quad& o) const {
  if (b_ == 0) return o.k_;
  if (o.b_ == 0 || o.k_ == k_) return k_;
  throw DomainError("cannot mix Q(sqrt(" + std::to_string(k_) + ")) and Q(sqrt(" +
                    std::to_string(o.k_) + "))");
}

int Quad::sign() const {
  int sa = sgn(a_);
  int sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  // Opposite signs: compare a^2 with b^2 k. Equality is impossible for square-free k > 1.
  Rational a2 = a_ * a_;
  Rational b2k = b_ * b_ * k_;
  return a2 > b2k ? sa : sb;
}

double Quad::to_double() const {
  return a_.get_d() + b_.get_d() * std::sqrt(static_cast<double>(k_));
}

std::string Quad::str() const {
  if (b_ == 0) return to_string(a_);
  std::string out;
  if (a_ != 0) out = to_string(a_);
  Rational mag = abs(b_);
  if (b_ < 0)
    out += "-";
  else if (!out.empty())
    out += "+";
  if (mag != 1) out += to_string(mag) + "*";
  out += "sqrt(" + std::to_string(k_) + ")";
  return out;
}

long Quad::floor() const {
  double approx = to_double();
  if (!std::isfinite(approx) || std::abs(approx) > 1e15) throw DomainError("floor out of range");
  long guess = static_cast<long>(std::floor(approx));
  while ((*this - Quad(guess)).sign() < 0) --guess;
  while ((*this - Quad(guess + 1)).sign() >= 0) ++guess;
  return guess;
}

Quad Quad::conjugate() const {
  Quad out = *this;
  out.b_ = -out.b_;
  return out;
}

Quad Quad::operator-() const {
  Quad out = *this;
  out.a_ = -out.a_;
  out.b_ = -out.b_;
  return out;
}

Quad& Quad::operator+=(const Quad& o) {
  k_ = join_radicand(o);
  a_ += o.a_;
  b_ += o.b_;
  if (b_ == 0) k_ = 1;
  return *this;
}

Quad& Quad::operator-=(const Quad& o) {
  k_ = join_radicand(o);
  a_ -= o.a_;
  b_ -= o.b_;
  if (b_ == 0) k_ = 1;
  return *this;
}

Quad& Quad::operator*=(const Quad& o) {
  long k = join_radicand(o);
  Rational a = a_ * o.a_ + b_ * o.b_ * k;
  Rational b = a_ * o.b_ + b_ * o.a_;
  a_ = std::move(a);
  b_ = std::move(b);
  k_ = b_ == 0 ? 1 : k;
  return *this;
}

Quad& Quad::operator/=(const Quad& o) {
  if (o.is_zero()) throw DomainError("division by zero");
  long k = join_radicand(o);
  // x / y = x * conj(y) / (ya^2 - k yb^2)
  Rational norm = o.a_ * o.a_ - o.b_ * o.b_ * o.k_;
  *this *= o.conjugate();
  a_ /= norm;
  b_ /= norm;
  k_ = b_ == 0 ? 1 : k;
  return *this;
}

}  // namespace sphcode
