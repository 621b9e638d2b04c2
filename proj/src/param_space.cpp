#include "sphcode/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sphcode/error.hpp"
#include "sphcode/format.hpp"

namespace sphcode {

namespace {

double xlog2x(double x) { return x <= 0.0 ? 0.0 : x * std::log2(x); }

// Integer k-th root of n if exact.
std::optional<std::uint64_t> exact_root(std::uint64_t n, unsigned k) {
  auto r = static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / k)));
  for (std::uint64_t c = r > 0 ? r - 1 : 0; c <= r + 1; ++c) {
    if (c < 2) continue;
    unsigned __int128 p = 1;
    for (unsigned i = 0; i < k && p <= n; ++i) p *= c;
    if (p == n) return c;
  }
  return std::nullopt;
}

}  // namespace

double rankin_bound(double phi) {
  if (!(phi > kPi / 2 && phi <= kPi + 1e-15)) throw DomainError("Rankin bound applies to large angles only");
  const double c = std::cos(phi);
  return (c - 1.0) / c;
}

double kl_envelope(double phi) {
  if (!(phi > 0.0)) throw DomainError("H(phi) needs phi > 0");
  if (phi > kPi / 2 + 1e-15) throw DomainError("H(phi) applies to phi <= pi/2");
  const double s = std::sin(std::min(phi, kPi / 2));
  if (phi >= kPi / 2) return 0.0;
  const double a = (1.0 + s) / (2.0 * s);
  const double b = (1.0 - s) / (2.0 * s);
  return xlog2x(a) - xlog2x(b);
}

bool in_undergraph(const CodePoint& p) {
  if (p.phi > kPi / 2) return true;
  if (p.phi <= 0.0) return true;
  return p.R <= kl_envelope(p.phi);
}

std::pair<std::uint64_t, unsigned> perfect_power(std::uint64_t n) {
  if (n <= 1) return {1, 0};
  for (unsigned k = 63; k >= 2; --k) {
    if (auto r = exact_root(n, k)) {
      auto inner = perfect_power(*r);
      return {inner.first, inner.second * k};
    }
  }
  return {n, 1};
}

RateKey RateKey::of(std::uint64_t count, unsigned dim) {
  if (dim == 0) throw DomainError("rate needs dim >= 1");
  auto [b, e] = perfect_power(count);
  RateKey k;
  k.base = b;
  k.exponent = Rational(e, dim);
  k.exponent.canonicalize();
  return k;
}

double RateKey::value() const { return base <= 1 ? 0.0 : exponent.get_d() * std::log2(static_cast<double>(base)); }

std::string RateKey::str() const {
  if (base <= 1) return "0";
  return to_string(exponent) + "*log2(" + std::to_string(base) + ")";
}

ParamGrid::ParamGrid(Rational resolution) : res_(std::move(resolution)) {
  res_.canonicalize();
  if (res_ <= 0) throw DomainError("phi resolution must be positive");
  step_ = res_.get_d();
}

long ParamGrid::bucket(double phi) const {
  // floor(phi / res) with res = p/q evaluated as floor(phi * q / p).
  return static_cast<long>(std::floor(phi * res_.get_den().get_d() / res_.get_num().get_d()));
}

double ParamGrid::bucket_mid(long b) const { return (static_cast<double>(b) + 0.5) * step_; }

long ParamGrid::max_bucket() const { return bucket(kPi); }

void ParamGrid::record(std::uint64_t count, unsigned dim, double phi) {
  if (count < 2) throw DomainError("record_code needs at least two points");
  auto& occ = entries_[{bucket(phi), RateKey::of(count, dim)}];
  occ.dims.insert(dim);
  occ.codes += 1;
  occ.counts.insert({count, dim});
}

void ParamGrid::record_code(const SphericalCode& code) {
  record(code.size(), static_cast<unsigned>(code.dim()), min_angle(code));
}

const EnvelopeRow& AlphaEnvelope::at(double phi) const {
  if (!(phi >= 0.0 && phi <= kPi + 1e-12) || rows.empty()) throw DomainError("phi outside the envelope range");
  auto b = static_cast<long>(std::floor(phi * resolution.get_den().get_d() / resolution.get_num().get_d()));
  b = std::clamp(b, 0L, rows.back().bucket);
  return rows[static_cast<std::size_t>(b)];
}

double AlphaEnvelope::slack(double phi) const {
  const double lo = std::max(phi - step, 1e-6);
  const double hi = std::min(phi + step, kPi / 2);
  if (phi > kPi / 2) return 0.0;
  return std::max(std::abs(kl_envelope(lo) - kl_envelope(phi)), std::abs(kl_envelope(hi) - kl_envelope(phi)));
}

std::vector<long> AlphaEnvelope::kl_exceedances() const {
  std::vector<long> out;
  for (const auto& r : rows)
    if (r.H && r.alpha_hat > *r.H + slack(r.phi) + 1e-12) out.push_back(r.bucket);
  return out;
}

AlphaEnvelope empirical_alpha(const ParamGrid& grid, std::optional<unsigned> dim) {
  AlphaEnvelope env;
  env.resolution = grid.resolution();
  env.step = grid.step();
  env.dim = dim;
  const long last = grid.max_bucket();
  env.rows.resize(static_cast<std::size_t>(last + 1));
  for (long b = 0; b <= last; ++b) {
    auto& row = env.rows[static_cast<std::size_t>(b)];
    row.bucket = b;
    row.phi = std::min(grid.bucket_mid(b), kPi);
    if (row.phi <= kPi / 2) row.H = kl_envelope(row.phi);
    if (row.phi > kPi / 2) row.rankin = rankin_bound(row.phi);
  }
  for (const auto& [key, occ] : grid.entries()) {
    if (key.first < 0 || key.first > last) continue;
    auto& row = env.rows[static_cast<std::size_t>(key.first)];
    for (const auto& [count, n] : occ.counts) {
      if (dim && n != *dim) continue;
      row.alpha_hat = std::max(row.alpha_hat, std::log2(static_cast<double>(count)) / n);
    }
  }
  return env;
}

bool gamma_eps_member(const CodePoint& p, const AlphaEnvelope& env, double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  return p.R >= env.at(p.phi).alpha_hat - eps;
}

std::string envelope_csv(const AlphaEnvelope& env, bool occupied_only) {
  std::string out = "phi,alpha_hat,H,rankin\n";
  for (const auto& r : env.rows) {
    if (occupied_only && r.alpha_hat == 0.0) continue;
    out += format_sig(r.phi) + "," + format_sig(r.alpha_hat) + "," + (r.H ? format_sig(*r.H) : "") + "," +
           (r.rankin ? format_sig(*r.rankin) : "") + "\n";
  }
  return out;
}

}  // namespace sphcode
