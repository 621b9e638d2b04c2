#include "sphcode/catalog.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "default_catalog.inc"
#include "sphcode/error.hpp"

namespace sphcode {

namespace {

using nlohmann::json;

std::pair<int, int> line_col(std::string_view text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Line numbers of the objects inside the top-level "records" array.
std::vector<int> record_lines(std::string_view text) {
  std::vector<int> lines;
  int depth = 0, line = 1;
  bool in_string = false, escaped = false;
  std::string last_key;
  std::string current;
  bool in_records = false;
  int records_depth = -1;
  for (char ch : text) {
    if (ch == '\n') ++line;
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (ch == '\\') {
        escaped = true;
      } else if (ch == '"') {
        in_string = false;
        last_key = current;
      } else {
        current += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_string = true;
        current.clear();
        break;
      case '[':
        ++depth;
        if (depth == 2 && last_key == "records") {
          in_records = true;
          records_depth = depth;
        }
        break;
      case '{':
        ++depth;
        if (in_records && depth == records_depth + 1) lines.push_back(line);
        break;
      case ']':
      case '}':
        if (in_records && depth == records_depth && ch == ']') in_records = false;
        --depth;
        break;
      default:
        break;
    }
  }
  return lines;
}

[[noreturn]] void schema_error(const std::string& what, int line) { throw ParseError("catalog: " + what, line, 1); }

template <class T>
T require(const json& obj, const char* key, int line) {
  if (!obj.contains(key)) schema_error(std::string("missing field '") + key + "'", line);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    schema_error(std::string("field '") + key + "' has the wrong type", line);
  }
}

PeriodicSet parse_realization(const json& r, unsigned dim, int line) {
  auto rows = [&](const char* key) {
    std::vector<QVec> out;
    if (!r.contains(key)) return out;
    if (!r.at(key).is_array()) schema_error(std::string("'") + key + "' must be an array", line);
    for (const auto& row : r.at(key)) {
      if (!row.is_array() || row.size() != dim) schema_error(std::string("'") + key + "' rows must have dim entries", line);
      QVec v;
      for (const auto& e : row) {
        if (!e.is_string()) schema_error("realization entries must be strings", line);
        try {
          v.push_back(Quad::parse(e.get<std::string>()));
        } catch (const Error& err) {
          schema_error(std::string("bad realization entry: ") + err.what(), line);
        }
      }
      out.push_back(std::move(v));
    }
    return out;
  };
  auto basis = rows("basis");
  if (basis.size() != dim) schema_error("realization basis must have dim rows", line);
  try {
    return PeriodicSet(Lattice(std::move(basis)), rows("translations"));
  } catch (const DomainError& e) {
    schema_error(std::string("bad realization: ") + e.what(), line);
  }
}

}  // namespace

std::string_view kind_name(RecordKind kind) {
  switch (kind) {
    case RecordKind::KnownMax: return "known-max";
    case RecordKind::Lattice: return "lattice";
    case RecordKind::Periodic: return "periodic";
  }
  return "?";
}

std::optional<RecordKind> parse_kind(std::string_view text) {
  if (text == "known-max") return RecordKind::KnownMax;
  if (text == "lattice") return RecordKind::Lattice;
  if (text == "periodic") return RecordKind::Periodic;
  return std::nullopt;
}

Catalog Catalog::parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("catalog: invalid JSON"), line, col);
  }
  if (!doc.is_object()) schema_error("top level must be an object", 1);
  Catalog cat;
  cat.version_ = require<std::string>(doc, "version", 1);
  if (!doc.contains("records") || !doc.at("records").is_array()) schema_error("missing 'records' array", 1);
  const auto lines = record_lines(text);
  std::size_t index = 0;
  for (const auto& r : doc.at("records")) {
    const int line = index < lines.size() ? lines[index] : 1;
    ++index;
    if (!r.is_object()) schema_error("records must be objects", line);
    PackingRecord rec;
    rec.line = line;
    const long dim = require<long>(r, "dim", line);
    if (dim < 1) schema_error("dim must be positive", line);
    rec.dim = static_cast<unsigned>(dim);
    auto kind = parse_kind(require<std::string>(r, "kind", line));
    if (!kind) schema_error("kind must be known-max, lattice or periodic", line);
    rec.kind = *kind;
    rec.delta = require<double>(r, "delta", line);
    rec.center_delta = require<double>(r, "center_delta", line);
    rec.description = require<std::string>(r, "description", line);
    rec.source = require<std::string>(r, "source", line);
    if (!(rec.delta > 0.0 && rec.delta <= 1.0)) schema_error("delta must lie in (0, 1]", line);
    if (!(rec.center_delta > 0.0)) schema_error("center_delta must be positive", line);
    if (std::abs(rec.center_delta * unit_ball_volume(rec.dim) - rec.delta) > 1e-9 * rec.delta)
      schema_error("delta and center_delta disagree", line);
    if (r.contains("center_delta_exact")) {
      try {
        rec.center_delta_exact = Quad::parse(require<std::string>(r, "center_delta_exact", line));
      } catch (const Error& e) {
        schema_error(std::string("bad center_delta_exact: ") + e.what(), line);
      }
      if (std::abs(rec.center_delta_exact->to_double() - rec.center_delta) > 1e-12 * rec.center_delta)
        schema_error("center_delta_exact disagrees with center_delta", line);
    }
    if (r.contains("size")) {
      const long size = require<long>(r, "size", line);
      if (size < 1) schema_error("size must be positive", line);
      rec.size = static_cast<std::size_t>(size);
    }
    if (r.contains("optimal")) rec.optimal = require<bool>(r, "optimal", line);
    if (rec.kind == RecordKind::KnownMax) rec.optimal = true;
    if (r.contains("realization")) {
      rec.realization = parse_realization(r.at("realization"), rec.dim, line);
      if (rec.realization->size() != rec.size) schema_error("realization size does not match 'size'", line);
      if (rec.dim <= kMaxEnumerationDim) {
        const double got = packing_density(*rec.realization);
        if (std::abs(got - rec.delta) > 1e-9) schema_error("realization density does not match delta", line);
      }
    }
    cat.records_.push_back(std::move(rec));
  }
  return cat;
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Catalog& Catalog::builtin() {
  static const Catalog cat = parse(kDefaultCatalogJson);
  return cat;
}

std::vector<const PackingRecord*> Catalog::in_dim(unsigned dim) const {
  std::vector<const PackingRecord*> out;
  for (const auto& r : records_)
    if (r.dim == dim) out.push_back(&r);
  return out;
}

const PackingRecord& Catalog::lookup(unsigned dim, RecordKind kind) const {
  for (const auto& r : records_)
    if (r.dim == dim && r.kind == kind) return r;
  throw DomainError("catalog has no " + std::string(kind_name(kind)) + " record in dimension " + std::to_string(dim));
}

const PackingRecord& Catalog::best(unsigned dim) const {
  const PackingRecord* best = nullptr;
  for (const auto& r : records_)
    if (r.dim == dim && (!best || r.delta > best->delta)) best = &r;
  if (!best) throw DomainError("catalog has no record in dimension " + std::to_string(dim));
  return *best;
}

std::pair<double, double> discrepancy(double density, unsigned dim, const Catalog& catalog) {
  const double max = catalog.best(dim).delta;
  const double gamma = density / max;
  if (gamma > 1.0 + 1e-12)
    throw DomainError("catalog violation: density " + std::to_string(density) + " exceeds recorded maximum in dimension " +
                      std::to_string(dim));
  const double g = std::abs(gamma - 1.0) <= 1e-12 ? 1.0 : std::min(gamma, 1.0);
  return {g, 1.0 - g};
}

std::pair<double, double> discrepancy(const PeriodicSet& set, const Catalog& catalog) {
  return discrepancy(packing_density(set), static_cast<unsigned>(set.dim()), catalog);
}

}  // namespace sphcode
