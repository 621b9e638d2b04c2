#include "sphcode/mult_oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "sphcode/error.hpp"

namespace sphcode {

std::size_t count_n(const Universe& u, std::size_t x) {
  if (x >= u.size()) throw BudgetError("element " + std::to_string(x) + " is beyond the enumeration budget");
  std::size_t n = 0;
  for (std::size_t i = 0; i <= x; ++i) n += u.f[i] == u.f[x];
  return n;
}

std::size_t count_nZ(const Universe& u, std::size_t x) {
  if (x >= u.size()) throw BudgetError("element " + std::to_string(x) + " is beyond the enumeration budget");
  if (!u.g) return count_n(u, x);
  std::set<ValueId> kept;
  for (std::size_t i = 0; i <= x; ++i)
    if (u.f[i] == u.f[x]) kept.insert((*u.g)[i]);
  return kept.size();
}

std::vector<std::size_t> all_counts(const Universe& u, bool section) {
  std::vector<std::size_t> out(u.size());
  std::unordered_map<ValueId, std::size_t> n;
  std::map<ValueId, std::set<ValueId>> kept;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (section && u.g) {
      auto& k = kept[u.f[i]];
      k.insert((*u.g)[i]);
      out[i] = k.size();
    } else {
      out[i] = ++n[u.f[i]];
    }
  }
  return out;
}

std::int64_t search_bound(std::int64_t y_index, std::int64_t m, double c) {
  if (y_index < 1 || m < 1 || !(c > 0.0)) throw DomainError("search bound needs y_index >= 1, m >= 1, c > 0");
  const double v = static_cast<double>(y_index) * static_cast<double>(m);
  const double lg = y_index * m == 1 ? 1.0 : std::log2(v);
  return static_cast<std::int64_t>(std::ceil(c * v * lg));
}

ComplexityOracle ComplexityOracle::structural(std::size_t size) {
  std::vector<std::uint64_t> s(size);
  std::iota(s.begin(), s.end(), 0);
  return from_scores("structural", std::move(s));
}

ComplexityOracle ComplexityOracle::from_scores(std::string name, std::vector<std::uint64_t> scores) {
  ComplexityOracle o;
  o.name = std::move(name);
  o.score = std::move(scores);
  std::vector<std::size_t> order(o.score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return o.score[a] < o.score[b]; });
  o.rank.assign(order.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) o.rank[order[r]] = r + 1;
  return o;
}

ClassifierState run_classifier(const Universe& u, const ComplexityOracle& oracle, const ClassifierConfig& config) {
  if (oracle.size() != u.size()) throw DomainError("oracle does not cover the universe prefix");
  if (config.steps < 0) throw DomainError("steps must be nonnegative");
  for (std::size_t i = 1; i < config.horizons.size(); ++i)
    if (config.horizons[i] <= config.horizons[i - 1]) throw DomainError("horizons must increase strictly");
  if (!config.horizons.empty() && config.horizons.size() < static_cast<std::size_t>(config.steps))
    throw DomainError("fewer horizons than steps");

  ClassifierState st;
  st.truncated = !u.complete;
  std::vector<ValueId> order;  // nu_Y: order of first appearance
  for (std::size_t i = 0; i < u.size(); ++i)
    if (st.y_index.emplace(u.f[i], order.size() + 1).second) order.push_back(u.f[i]);

  // best[(y, k)] = (oracle rank, element) of the lowest-rank x with f(x) = y and count k
  const auto counts = all_counts(u, true);
  std::map<std::pair<ValueId, std::size_t>, std::pair<std::size_t, std::size_t>> best;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto key = std::make_pair(u.f[i], counts[i]);
    auto it = best.find(key);
    if (it == best.end() || oracle.rank[i] < it->second.first) best[key] = {oracle.rank[i], i};
  }

  auto horizon = [&](int m) -> std::size_t {
    if (!config.horizons.empty()) return config.horizons[static_cast<std::size_t>(m - 1)];
    if (config.first_horizon == 0) return 0;
    const int shift = std::min(m - 1, 62);
    const std::size_t cap = order.size();
    std::size_t h = config.first_horizon;
    for (int s = 0; s < shift && h < cap; ++s) h *= 2;
    return h;
  };

  auto witness = [&](ValueId y, std::size_t k, int m) {
    const std::int64_t bound = search_bound(static_cast<std::int64_t>(st.y_index[y]), static_cast<std::int64_t>(k), config.c);
    auto& mb = st.max_bound[y];
    mb = std::max(mb, bound);
    if (config.strict_budget && !u.complete && bound > static_cast<std::int64_t>(u.size()))
      throw BudgetError("oracle budget exhausted at (" + std::to_string(y) + ", " + std::to_string(m) + ")");
    auto it = best.find({y, k});
    if (it != best.end() && static_cast<std::int64_t>(it->second.first) <= bound) {
      st.witnesses[y].push_back(it->second.second);
      st.log.push_back({m, y, AuditAction::Witnessed, bound, it->second.first});
      return true;
    }
    st.log.push_back({m, y, AuditAction::Demoted, bound, std::nullopt});
    return false;
  };

  for (int m = 1; m <= config.steps; ++m) {
    st.step = m;
    st.horizon = horizon(m);
    const std::size_t listed = std::min(st.horizon, order.size());
    for (std::size_t i = 0; i < listed; ++i) {
      const ValueId y = order[i];
      if (st.A.count(y) || st.B.count(y)) continue;
      st.A.insert(y);
      st.log.push_back({m, y, AuditAction::Added, 0, std::nullopt});
      // A value listed at step m needs witnesses with counts 1..m.
      for (std::size_t k = 1; k < static_cast<std::size_t>(m); ++k)
        if (!witness(y, k, m)) {
          st.A.erase(y);
          st.B.insert(y);
          break;
        }
    }
    std::vector<ValueId> current(st.A.begin(), st.A.end());
    std::sort(current.begin(), current.end(), [&](ValueId a, ValueId b) { return st.y_index[a] < st.y_index[b]; });
    for (ValueId y : current)
      if (!witness(y, static_cast<std::size_t>(m), m)) {
        st.A.erase(y);
        st.B.insert(y);
      }
    st.history.push_back({m, st.horizon, st.A, st.B});
  }
  return st;
}

BruteForcePartition brute_force_classify(const Universe& u, std::size_t threshold) {
  BruteForcePartition p;
  std::map<ValueId, std::set<ValueId>> sections;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.g)
      sections[u.f[i]].insert((*u.g)[i]);
    else
      ++p.counts[u.f[i]];
  }
  for (const auto& [y, s] : sections) p.counts[y] = s.size();
  for (const auto& [y, c] : p.counts) (c > threshold ? p.exceeds : p.finite).insert(y);
  return p;
}

std::set<ValueId> stable_values(const ClassifierState& state, int stable) {
  std::set<ValueId> out;
  if (stable < 1 || state.history.size() < static_cast<std::size_t>(stable)) return out;
  const auto& last = state.history.back();
  for (const auto* set : {&last.A, &last.B})
    for (ValueId y : *set) {
      bool same = true;
      for (std::size_t i = state.history.size() - static_cast<std::size_t>(stable); i < state.history.size(); ++i)
        same = same && state.history[i].A.count(y) == last.A.count(y) && state.history[i].B.count(y) == last.B.count(y);
      if (same) out.insert(y);
    }
  return out;
}

std::string_view action_name(AuditAction a) {
  switch (a) {
    case AuditAction::Added: return "added";
    case AuditAction::Witnessed: return "witnessed";
    case AuditAction::Demoted: return "demoted";
  }
  return "?";
}

std::string audit_jsonl(const ClassifierState& state, const std::function<std::string(ValueId)>& label) {
  std::ostringstream out;
  for (const auto& r : state.log) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    if (label)
      j["value"] = label(r.value);
    else
      j["value"] = r.value;
    j["action"] = action_name(r.action);
    j["bound"] = r.bound;
    if (r.rank)
      j["rank"] = *r.rank;
    else
      j["rank"] = nullptr;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::uint64_t lzss_bits(const std::string& data) {
  constexpr std::size_t kWindow = 4095, kMinMatch = 3, kMaxMatch = 18, kChain = 64;
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> heads;
  auto key = [&](std::size_t i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(data[i])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(data[i + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(data[i + 2]));
  };
  auto insert = [&](std::size_t i) {
    if (i + kMinMatch <= data.size()) heads[key(i)].push_back(i);
  };
  std::uint64_t bits = 0;
  std::size_t i = 0;
  while (i < data.size()) {
    std::size_t best = 0;
    if (i + kMinMatch <= data.size()) {
      auto it = heads.find(key(i));
      if (it != heads.end()) {
        const auto& chain = it->second;
        std::size_t tried = 0;
        for (auto p = chain.rbegin(); p != chain.rend() && tried < kChain; ++p, ++tried) {
          if (i - *p > kWindow) break;
          std::size_t len = 0;
          while (len < kMaxMatch && i + len < data.size() && data[*p + len] == data[i + len]) ++len;
          best = std::max(best, len);
        }
      }
    }
    if (best >= kMinMatch) {
      bits += 1 + 12 + 4;
      for (std::size_t k = 0; k < best; ++k) insert(i + k);
      i += best;
    } else {
      bits += 1 + 8;
      insert(i);
      ++i;
    }
  }
  return bits;
}

std::uint64_t compression_score(const std::string& data) {
  return kCompressorHeaderBits + std::min<std::uint64_t>(lzss_bits(data), 8 * data.size());
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

ComplexityOracle compression_oracle(const EnumeratedSpace& space) {
  std::unordered_map<std::uint64_t, std::uint64_t> cache;
  std::filesystem::path file;
  if (const char* dir = std::getenv("SPHCODE_CACHE_DIR"); dir && *dir) {
    file = std::filesystem::path(dir) / (std::string("oracle-scores-") + kCompressorVersion + ".txt");
    std::ifstream in(file);
    std::uint64_t h = 0, s = 0;
    while (in >> h >> s) cache.emplace(h, s);
  }
  std::vector<std::uint64_t> scores(space.size);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> fresh;
  for (std::size_t i = 0; i < space.size; ++i) {
    const std::string text = space.serialize(i);
    const std::uint64_t h = fnv1a(text);
    if (auto it = cache.find(h); it != cache.end()) {
      scores[i] = it->second;
    } else {
      scores[i] = compression_score(text);
      cache.emplace(h, scores[i]);
      fresh.emplace_back(h, scores[i]);
    }
  }
  if (!file.empty() && !fresh.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::app);
    for (const auto& [h, s] : fresh) out << h << ' ' << s << '\n';
  }
  return ComplexityOracle::from_scores(std::string("compression/") + kCompressorVersion, std::move(scores));
}

}  // namespace sphcode
