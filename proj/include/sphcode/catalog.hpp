#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sphcode/packings.hpp"

namespace sphcode {

enum class RecordKind { KnownMax, Lattice, Periodic };

std::string_view kind_name(RecordKind kind);
std::optional<RecordKind> parse_kind(std::string_view text);

struct PackingRecord {
  unsigned dim = 0;
  RecordKind kind = RecordKind::Lattice;
  double delta = 0.0;
  double center_delta = 0.0;
  std::optional<Quad> center_delta_exact;
  std::size_t size = 1;   // number of lattice translates realizing the record
  bool optimal = false;   // density asserted to be the maximum in this dimension
  std::string description;
  std::string source;
  std::optional<PeriodicSet> realization;
  int line = 0;           // line of the record in the source file
};

/// Curated packing records; stands in for the set of optimal packings.
class Catalog {
 public:
  static Catalog parse(std::string_view json_text);
  static Catalog load(const std::string& path);
  /// The catalog shipped with the library.
  static const Catalog& builtin();

  const std::string& version() const noexcept { return version_; }
  const std::vector<PackingRecord>& records() const noexcept { return records_; }

  std::vector<const PackingRecord*> in_dim(unsigned dim) const;
  /// Throws DomainError when no record of that kind exists.
  const PackingRecord& lookup(unsigned dim, RecordKind kind) const;
  /// Largest recorded density in a dimension (the Delta_max stand-in).
  const PackingRecord& best(unsigned dim) const;

 private:
  std::string version_;
  std::vector<PackingRecord> records_;
};

/// (gamma, 1 - gamma) with gamma = Delta_P / Delta_max(dim).
std::pair<double, double> discrepancy(const PeriodicSet& set, const Catalog& catalog);
std::pair<double, double> discrepancy(double density, unsigned dim, const Catalog& catalog);

}  // namespace sphcode
