#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sphcode {

using ValueId = std::int64_t;

/// A finite prefix of a structurally ordered space X (index = nu_X order)
/// with the target map f and optional section map g evaluated on it.
struct Universe {
  std::vector<ValueId> f;
  std::optional<std::vector<ValueId>> g;
  /// true when the prefix is the whole space, so an oracle over it is total
  bool complete = true;

  std::size_t size() const noexcept { return f.size(); }
};

/// Elements of X with a serializer, for complexity surrogates.
struct EnumeratedSpace {
  std::string name;
  std::size_t size = 0;
  std::function<std::string(std::size_t)> serialize;
};

/// n(x): predecessors of x (inclusive) sharing f(x).
std::size_t count_n(const Universe& u, std::size_t x);
/// n_Z(x): size of the g-section of N(x) scanned in structural order.
std::size_t count_nZ(const Universe& u, std::size_t x);
std::vector<std::size_t> all_counts(const Universe& u, bool section);

/// ceil(c * y * m * log2(y * m)), with log2(1) replaced by 1.
std::int64_t search_bound(std::int64_t y_index, std::int64_t m, double c);

/// Scores and the induced order (score, structural index); rank is 1-based.
struct ComplexityOracle {
  std::string name;
  std::vector<std::uint64_t> score;
  std::vector<std::size_t> rank;

  static ComplexityOracle structural(std::size_t size);
  static ComplexityOracle from_scores(std::string name, std::vector<std::uint64_t> scores);
  std::size_t size() const noexcept { return score.size(); }
};

enum class AuditAction { Added, Witnessed, Demoted };

struct AuditRecord {
  int step = 0;
  ValueId value = 0;
  AuditAction action = AuditAction::Added;
  std::int64_t bound = 0;
  std::optional<std::size_t> rank;
};

struct ClassifierConfig {
  double c = 4.0;
  std::size_t first_horizon = 1;
  /// explicit horizons N_1 < N_2 < ...; default N_m = 2^(m-1) N_1
  std::vector<std::size_t> horizons;
  int steps = 6;
  /// raise BudgetError when a bound exceeds an incomplete prefix
  bool strict_budget = false;
};

struct StepSnapshot {
  int step = 0;
  std::size_t horizon = 0;
  std::set<ValueId> A, B;
};

struct ClassifierState {
  int step = 0;
  std::size_t horizon = 0;
  std::set<ValueId> A, B;
  std::map<ValueId, std::vector<std::size_t>> witnesses;
  std::map<ValueId, std::int64_t> max_bound;
  std::map<ValueId, std::size_t> y_index;
  std::vector<AuditRecord> log;
  std::vector<StepSnapshot> history;
  bool truncated = false;
};

ClassifierState run_classifier(const Universe& u, const ComplexityOracle& oracle, const ClassifierConfig& config);

struct BruteForcePartition {
  std::set<ValueId> finite, exceeds;
  std::map<ValueId, std::size_t> counts;
};

/// Exact counts #f^-1(y) (or #g(f^-1(y)) when g is present) against a threshold.
BruteForcePartition brute_force_classify(const Universe& u, std::size_t threshold);

/// Values whose A/B membership is unchanged over the last `stable` snapshots.
std::set<ValueId> stable_values(const ClassifierState& state, int stable);

std::string_view action_name(AuditAction a);
/// One JSON object per line.
std::string audit_jsonl(const ClassifierState& state, const std::function<std::string(ValueId)>& label = {});

// Compression surrogate for the complexity order.

inline constexpr const char* kCompressorVersion = "lzss-1";
inline constexpr std::uint64_t kCompressorHeaderBits = 16;

/// Bits emitted by the LZSS coder: flag bit, then an 8-bit literal or a 12-bit offset and 4-bit length.
std::uint64_t lzss_bits(const std::string& data);
/// header + min(LZSS bits, raw bits).
std::uint64_t compression_score(const std::string& data);

/// Scores cached on disk under $SPHCODE_CACHE_DIR (if set), keyed by FNV-1a of the serialization.
ComplexityOracle compression_oracle(const EnumeratedSpace& space);
std::uint64_t fnv1a(const std::string& data);

}  // namespace sphcode
