#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sphcode/exact.hpp"
#include "sphcode/sphere_geom.hpp"

namespace sphcode {

struct CodePoint {
  double R = 0.0;
  double phi = 0.0;
};

/// (cos phi - 1) / cos phi, for pi/2 < phi <= pi.
double rankin_bound(double phi);
/// Kabatiansky-Levenshtein rate bound H(phi) for 0 < phi <= pi/2.
double kl_envelope(double phi);
bool in_undergraph(const CodePoint& p);

/// N written as base^power with base not a perfect power (1 = 1^0).
std::pair<std::uint64_t, unsigned> perfect_power(std::uint64_t n);

/// Exact rate key: R = exponent * log2(base) with exponent rational.
struct RateKey {
  std::uint64_t base = 1;
  Rational exponent{0};

  static RateKey of(std::uint64_t count, unsigned dim);
  double value() const;
  std::string str() const;
  friend bool operator<(const RateKey& a, const RateKey& b) {
    return a.base != b.base ? a.base < b.base : a.exponent < b.exponent;
  }
  friend bool operator==(const RateKey& a, const RateKey& b) { return a.base == b.base && a.exponent == b.exponent; }
};

struct Occupancy {
  std::multiset<unsigned> dims;
  std::size_t codes = 0;
  std::set<std::pair<std::uint64_t, unsigned>> counts;  // (N, n)
};

/// Quantized parameter plane; one entry per (phi bucket, exact rate).
class ParamGrid {
 public:
  explicit ParamGrid(Rational resolution = Rational(1, 512));

  const Rational& resolution() const noexcept { return res_; }
  double step() const noexcept { return step_; }
  long bucket(double phi) const;
  double bucket_mid(long bucket) const;
  long max_bucket() const;

  void record(std::uint64_t count, unsigned dim, double phi);
  void record_code(const SphericalCode& code);

  using Key = std::pair<long, RateKey>;
  const std::map<Key, Occupancy>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  Rational res_;
  double step_;
  std::map<Key, Occupancy> entries_;
};

struct EnvelopeRow {
  long bucket = 0;
  double phi = 0.0;  // bucket midpoint
  double alpha_hat = 0.0;
  std::optional<double> H;
  std::optional<double> rankin;
};

/// Empirical stand-in for alpha(phi) on every bucket of [0, pi].
struct AlphaEnvelope {
  Rational resolution;
  double step = 0.0;
  std::optional<unsigned> dim;  // restricted to one dimension when set
  std::vector<EnvelopeRow> rows;

  const EnvelopeRow& at(double phi) const;
  /// Buckets with phi <= pi/2 where alpha_hat exceeds H plus the grid slack.
  std::vector<long> kl_exceedances() const;
  /// Lipschitz slack of H over one bucket at phi.
  double slack(double phi) const;
};

AlphaEnvelope empirical_alpha(const ParamGrid& grid, std::optional<unsigned> dim = std::nullopt);

/// R >= alpha_hat(phi bucket) - eps. Membership is relative to the envelope.
bool gamma_eps_member(const CodePoint& p, const AlphaEnvelope& env, double eps);

/// phi, alpha_hat, H, rankin (empty cells where undefined); 12 significant digits.
std::string envelope_csv(const AlphaEnvelope& env, bool occupied_only = false);

}  // namespace sphcode
