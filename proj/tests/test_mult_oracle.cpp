#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>

#include "sphcode/error.hpp"
#include "sphcode/mult_oracle.hpp"

using namespace sphcode;

namespace {

Universe make(std::size_t size, const std::function<ValueId(ValueId)>& f,
              const std::function<ValueId(ValueId)>& g = {}) {
  Universe u;
  for (std::size_t i = 0; i < size; ++i) u.f.push_back(f(static_cast<ValueId>(i)));
  if (g) {
    u.g.emplace();
    for (std::size_t i = 0; i < size; ++i) u.g->push_back(g(static_cast<ValueId>(i)));
  }
  return u;
}

struct Named {
  const char* name;
  Universe u;
};

std::vector<Named> universes() {
  return {
      {"min(x,10), g = id", make(200, [](ValueId x) { return std::min<ValueId>(x, 10); }, [](ValueId x) { return x; })},
      {"f constant, g constant", make(64, [](ValueId) { return 0; }, [](ValueId) { return 0; })},
      {"g injective", make(100, [](ValueId x) { return x % 7; }, [](ValueId x) { return 3 * x + 1; })},
      {"g periodic", make(120, [](ValueId x) { return x % 2; }, [](ValueId x) { return x % 6; })},
      {"two blocks", make(200, [](ValueId x) { return x < 60 ? x / 6 : 10 + x % 4; },
                          [](ValueId x) { return x < 60 ? x % 3 : x; })},
      {"min(x,10), no g", make(200, [](ValueId x) { return std::min<ValueId>(x, 10); })},
  };
}

// Values in order of first appearance.
std::vector<ValueId> first_appearance(const Universe& u) {
  std::vector<ValueId> out;
  for (ValueId v : u.f)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("counting functions") {
  auto u = make(200, [](ValueId x) { return std::min<ValueId>(x, 10); }, [](ValueId x) { return x; });
  CHECK(count_n(u, 0) == 1);
  CHECK(count_n(u, 12) == 3);
  auto p = make(20, [](ValueId x) { return x % 2; }, [](ValueId x) { return x % 6; });
  CHECK(count_nZ(p, 8) == 3);
  CHECK(count_n(p, 8) == 5);
  CHECK_THROWS_AS(count_n(u, 200), BudgetError);
  for (const auto& [name, v] : universes()) {
    const auto n = all_counts(v, false), nz = all_counts(v, true);
    for (std::size_t x = 0; x < v.size(); x += 7) {
      CHECK(n[x] == count_n(v, x));
      CHECK(nz[x] == count_nZ(v, x));
      CHECK(nz[x] <= n[x]);
    }
  }
  auto inj = make(50, [](ValueId x) { return x % 3; }, [](ValueId x) { return x; });
  auto con = make(50, [](ValueId x) { return x % 3; }, [](ValueId) { return 4; });
  for (std::size_t x = 0; x < 50; ++x) {
    CHECK(count_nZ(inj, x) == count_n(inj, x));
    CHECK(count_nZ(con, x) == 1);
  }
  // n is nondecreasing along each fibre
  std::map<ValueId, std::size_t> last;
  for (std::size_t x = 0; x < u.size(); ++x) {
    CHECK(count_n(u, x) >= last[u.f[x]]);
    last[u.f[x]] = count_n(u, x);
  }
}

TEST_CASE("search bound") {
  CHECK(search_bound(3, 2, 1.0) == 16);
  CHECK(search_bound(1, 1, 1.0) == 1);
  CHECK(search_bound(1, 1, 4.0) == 4);
  for (std::int64_t y = 1; y <= 20; ++y)
    for (std::int64_t m = 1; m <= 20; ++m) {
      CHECK(search_bound(y, m + 1, 4.0) >= search_bound(y, m, 4.0));
      CHECK(search_bound(y + 1, m, 4.0) >= search_bound(y, m, 4.0));
      if (y * m >= 2) {
        const double ratio = static_cast<double>(search_bound(y, 2 * m, 1000.0)) / static_cast<double>(search_bound(y, m, 1000.0));
        CHECK(ratio > 2.0);
        CHECK(ratio <= 2.0 * (1 + 1 / std::log2(static_cast<double>(y * m))) + 1e-3);
      }
    }
  CHECK_THROWS_AS(search_bound(0, 1, 1.0), DomainError);
}

TEST_CASE("brute force partition") {
  auto u = make(200, [](ValueId x) { return std::min<ValueId>(x, 10); }, [](ValueId x) { return x; });
  auto p = brute_force_classify(u, 50);
  CHECK(p.exceeds == std::set<ValueId>{10});
  CHECK(p.finite.size() == 10);
  CHECK(p.counts[10] == 190);
  CHECK(brute_force_classify(u, 1000).exceeds.empty());
}

TEST_CASE("toy universe example") {
  auto u = make(200, [](ValueId x) { return std::min<ValueId>(x, 10); }, [](ValueId x) { return x; });
  ClassifierConfig cfg;
  cfg.steps = 5;
  auto st = run_classifier(u, ComplexityOracle::structural(u.size()), cfg);
  CHECK(st.A == std::set<ValueId>{10});
  std::set<ValueId> low;
  for (ValueId v = 0; v < 10; ++v) low.insert(v);
  CHECK(st.B == low);
  CHECK(st.witnesses[10].size() >= 5);

  auto c = make(64, [](ValueId) { return 0; }, [](ValueId) { return 0; });
  auto sc = run_classifier(c, ComplexityOracle::structural(c.size()), cfg);
  CHECK(sc.history[0].A == std::set<ValueId>{0});
  CHECK(sc.history[1].B == std::set<ValueId>{0});
  CHECK(sc.A.empty());

  ClassifierConfig none = cfg;
  none.first_horizon = 0;
  auto empty = run_classifier(u, ComplexityOracle::structural(u.size()), none);
  CHECK(empty.A.empty());
  CHECK(empty.B.empty());
}

TEST_CASE("classifier matches brute force on every step") {
  for (const auto& [name, u] : universes()) {
    ClassifierConfig cfg;
    cfg.steps = 6;
    auto st = run_classifier(u, ComplexityOracle::structural(u.size()), cfg);
    const auto order = first_appearance(u);
    REQUIRE(st.history.size() == 6);
    for (int m = 1; m <= 6; ++m) {
      const auto truth = brute_force_classify(u, static_cast<std::size_t>(m - 1));
      const std::size_t listed = std::min<std::size_t>(std::size_t{1} << (m - 1), order.size());
      std::set<ValueId> a, b;
      for (std::size_t i = 0; i < listed; ++i) (truth.exceeds.count(order[i]) ? a : b).insert(order[i]);
      const auto& snap = st.history[static_cast<std::size_t>(m - 1)];
      CHECK_MESSAGE(snap.A == a, name << " step " << m);
      CHECK_MESSAGE(snap.B == b, name << " step " << m);
    }
  }
}

TEST_CASE("audit invariants") {
  for (const auto& [name, u] : universes()) {
    ClassifierConfig cfg;
    cfg.steps = 6;
    cfg.first_horizon = 2;
    auto st = run_classifier(u, ComplexityOracle::structural(u.size()), cfg);
    std::set<ValueId> demoted;
    for (const auto& r : st.log) {
      if (r.action == AuditAction::Demoted) demoted.insert(r.value);
      else CHECK_MESSAGE(!demoted.count(r.value), name);
    }
    for (const auto& snap : st.history) {
      for (ValueId y : snap.A) CHECK(!snap.B.count(y));
      if (&snap != &st.history.front())
        for (ValueId y : (&snap - 1)->B) CHECK(snap.B.count(y));
    }
    for (ValueId y : st.A) CHECK(st.witnesses[y].size() >= static_cast<std::size_t>(st.step));
    CHECK(audit_jsonl(st).find("\"action\":\"added\"") != std::string::npos);
  }
}

TEST_CASE("strict budget") {
  auto u = make(40, [](ValueId x) { return std::min<ValueId>(x, 10); });
  u.complete = false;
  ClassifierConfig cfg;
  cfg.strict_budget = true;
  CHECK_THROWS_WITH_AS(run_classifier(u, ComplexityOracle::structural(u.size()), cfg),
                       doctest::Contains("oracle budget exhausted at"), BudgetError);
  cfg.strict_budget = false;
  CHECK(run_classifier(u, ComplexityOracle::structural(u.size()), cfg).truncated);
}

TEST_CASE("oracle order invariance") {
  for (const auto& [name, u] : universes()) {
    ClassifierConfig cfg;
    cfg.steps = 6;
    cfg.c = 1000.0;
    // Reversed order: every bound still covers the whole prefix.
    std::vector<std::uint64_t> rev(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) rev[i] = u.size() - i;
    auto a = run_classifier(u, ComplexityOracle::structural(u.size()), cfg);
    auto b = run_classifier(u, ComplexityOracle::from_scores("reversed", rev), cfg);
    CHECK_MESSAGE(a.A == b.A, name);
    CHECK_MESSAGE(a.B == b.B, name);
  }
}

TEST_CASE("compression oracle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(0.0, 6.283);
  std::string repeated, distinct;
  for (int i = 0; i < 40; ++i) {
    repeated += "0.7071067811865476 0.7071067811865476\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16f %.16f\n", std::cos(angle(rng)), std::sin(angle(rng)));
    distinct += buf;
  }
  CHECK(compression_score(repeated) < compression_score(distinct));
  CHECK(compression_score(repeated) == compression_score(repeated));
  for (const auto* s : {&repeated, &distinct}) CHECK(compression_score(*s) <= 8 * s->size() + kCompressorHeaderBits);
  CHECK(compression_score("") == kCompressorHeaderBits);
  CHECK(lzss_bits("abc") == 27);
  CHECK(lzss_bits("abcabc") == 27 + 17);

  EnumeratedSpace space{"naturals", 50, [](std::size_t i) { return std::to_string(i * i); }};
  const auto dir = std::filesystem::temp_directory_path() / "sphcode-oracle-cache-test";
  std::filesystem::remove_all(dir);
  ::setenv("SPHCODE_CACHE_DIR", dir.c_str(), 1);
  auto first = compression_oracle(space);
  CHECK(std::filesystem::exists(dir / "oracle-scores-lzss-1.txt"));
  auto second = compression_oracle(space);
  ::unsetenv("SPHCODE_CACHE_DIR");
  CHECK(first.score == second.score);
  CHECK(first.rank == second.rank);
  auto third = compression_oracle(space);
  CHECK(third.score == first.score);
  std::filesystem::remove_all(dir);
  // ties are broken by structural index
  for (std::size_t i = 1; i < space.size; ++i)
    if (first.score[i] == first.score[i - 1]) CHECK(first.rank[i] > first.rank[i - 1]);
}
