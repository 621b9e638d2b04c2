#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sphcode/catalog.hpp"
#include "sphcode/mult_oracle.hpp"
#include "sphcode/packings.hpp"
#include "sphcode/param_space.hpp"
#include "sphcode/sphere_geom.hpp"
#include "sphcode/wrap.hpp"

namespace sphcode {

struct EnumeratedCode {
  SphericalCode code;
  Rational phi;  // minimal angle in units of pi
  std::string family;
  unsigned level = 0;

  double phi_radians() const { return phi.get_d() * kPi; }
};

/// Codes with rational angular coordinates and rational minimal angle, by level L = 1, 2, ...:
/// circle gap codes (floor(2L/p) points spaced p/L, gcd(p, L) = 1), S^2 latitude rings with
/// angle 1/L (L <= 48), antipodal pairs and cross-polytopes in dimension L (3..6), and
/// equatorial rings of 2^n points spaced 1/q in dimensions 3..6 (q = 8L, levels 5..8).
/// Every code's minimal angle is verified on emission.
class CodeEnumerator {
 public:
  explicit CodeEnumerator(std::size_t budget);
  std::optional<EnumeratedCode> next();
  std::size_t emitted() const noexcept { return emitted_; }

 private:
  void fill_level();
  std::size_t budget_;
  std::size_t emitted_ = 0;
  unsigned level_ = 0;
  std::vector<EnumeratedCode> pending_;
  std::size_t cursor_ = 0;
};

std::vector<EnumeratedCode> enumerate_codes(std::size_t budget);

struct GridCell {
  long bucket = 0;
  RateKey rate;
  friend bool operator<(const GridCell& a, const GridCell& b) {
    return a.bucket != b.bucket ? a.bucket < b.bucket : a.rate < b.rate;
  }
  friend bool operator==(const GridCell& a, const GridCell& b) { return a.bucket == b.bucket && a.rate == b.rate; }
};

struct CodeTag {
  GridCell cell;
  double R = 0.0;
  double phi = 0.0;
  unsigned dim = 0;
};

/// Grid-bucketed code point and dimension tag (ambient dimension).
CodeTag P_and_D(const SphericalCode& code, const ParamGrid& grid = ParamGrid());

ParamGrid grid_from(const std::vector<EnumeratedCode>& codes, Rational resolution = Rational(1, 512));

enum class OracleKind { Structural, Compression };

struct ClassifyConfig {
  std::size_t budget = 2000;
  OracleKind oracle = OracleKind::Structural;
  int steps = 3;
  int stable = 3;
  double c = 4.0;
  /// 0 lists every cell at the first step
  std::size_t first_horizon = 0;
  bool strict_budget = false;
};

struct CellLabel {
  GridCell cell;
  double R = 0.0;
  bool infinite_candidate = false;
  /// A/B membership unchanged over the last `stable` steps
  bool stable = false;
  std::vector<unsigned> witness_dims;
  std::vector<unsigned> seen_dims;
};

struct Classification {
  std::vector<CellLabel> cells;  // sorted by cell
  ClassifierState state;
  std::vector<GridCell> values;  // ValueId -> cell
  std::string oracle_name;
};

Classification classify_dimension_multiplicity(const ClassifyConfig& config);
/// phi_bucket,R,label,witness_dims
std::string classification_csv(const Classification& c);

struct MembershipRow {
  std::size_t k = 0;
  double d = 0.0;
  double R = 0.0;
  double phi = 0.0;
  double alpha_hat = 0.0;
  /// R - (alpha_hat - eps); nonnegative means inside Gamma_eps
  double margin = 0.0;
  /// the envelope bucket holds at least one enumerated code
  bool occupied = false;
};

struct MembershipReport {
  bool member = false;
  std::vector<MembershipRow> trace;
  double slack = 0.0;  // grid resolution slack at the smallest phi
};

/// Truncated intersection over k0..k_max of schedule(d_k) code points in Gamma_eps (envelope-relative).
MembershipReport frakP_membership(const PeriodicSet& packing, double eps, const std::vector<double>& ds, std::size_t k0,
                                  std::size_t k_max, const AlphaEnvelope& env, unsigned workers = 1);

/// Lipschitz slack of alpha ~ (n-1)/n log2(1/phi) across one bucket.
double resolution_slack(unsigned n, double phi, double resolution);

struct OffsetRow {
  double d = 0.0;
  double R = 0.0;
  double phi = 0.0;
  double alpha_hat = 0.0;
  double offset = 0.0;  // alpha_hat - R
  bool occupied = false;
};

struct OffsetReport {
  double gamma = 1.0;
  unsigned n = 0;
  double predicted = 0.0;  // -log2(gamma)/n
  double eps = 0.0;
  std::vector<OffsetRow> rows;
  double measured_tail = 0.0;
  /// offset at the last d is at most predicted + eps, in an occupied bucket
  bool holds = false;
};

OffsetReport discrepancy_offset_check(const PeriodicSet& packing, double eps, const std::vector<double>& ds,
                                      const AlphaEnvelope& env, const Catalog& catalog, unsigned workers = 1);

enum class OptKind { Latt, PerLe, PerF, Per };

struct OptConfig {
  OptKind kind = OptKind::Latt;
  std::size_t bound = 0;                       // Per<=N
  std::map<unsigned, std::size_t> f_table;     // Per_F
  std::vector<unsigned> dims = {1, 2};
  double eps = 0.2;
  std::vector<double> ds = {0.1, 0.05, 0.02};
  std::size_t k0 = 0;
  std::optional<std::size_t> k_max;
  std::size_t budget = 10000;
  unsigned workers = 1;
};

struct OptVerdict {
  unsigned dim = 0;
  std::string verdict;
  std::string candidate;
  std::optional<MembershipReport> membership;
};

struct OptReport {
  OptConfig config;
  std::string kind_label;
  std::string catalog_version;
  std::vector<OptVerdict> verdicts;
};

std::string opt_kind_label(const OptConfig& config);
OptReport opt_experiment(const OptConfig& config, const Catalog& catalog);
std::string opt_report_json(const OptReport& report);

}  // namespace sphcode
