#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "sphcode/error.hpp"
#include "sphcode/experiment.hpp"

using namespace sphcode;

namespace {

PeriodicSet integers() { return PeriodicSet(Lattice::integer(1)); }
PeriodicSet cosets(Rational t) { return PeriodicSet(Lattice({{Quad(2)}}), {{Quad(0)}, {Quad(t)}}); }

const std::vector<EnumeratedCode>& full() {
  static const auto codes = enumerate_codes(10000);
  return codes;
}

const AlphaEnvelope& circle_envelope() {
  static const auto env = empirical_alpha(grid_from(full()), 2);
  return env;
}

// Brute-force minimal angle in long double, independent of the kernels.
long double slow_min_angle(const SphericalCode& code) {
  long double best = 4;
  for (std::size_t i = 0; i < code.size(); ++i)
    for (std::size_t j = i + 1; j < code.size(); ++j) {
      const auto& a = code[i].coords();
      const auto& b = code[j].coords();
      long double d2 = 0;
      for (std::size_t k = 0; k < a.size(); ++k) d2 += (static_cast<long double>(a[k]) - b[k]) * (static_cast<long double>(a[k]) - b[k]);
      best = std::min(best, 2 * std::asin(std::sqrt(d2) / 2));
    }
  return best;
}

SphericalCode from_rows(std::size_t dim, const std::vector<std::vector<double>>& rows) {
  std::vector<SpherePoint> pts;
  for (const auto& r : rows) pts.push_back(SpherePoint::from_coords(r));
  return SphericalCode(dim, std::move(pts));
}

int tier(const std::string& v) { return v == "member" ? 2 : v == "inconclusive" ? 1 : 0; }

}  // namespace

TEST_CASE("first code is the antipodal pair on the circle") {
  auto one = enumerate_codes(1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].code.dim() == 2);
  CHECK(one[0].code.size() == 2);
  CHECK(one[0].phi == Rational(1));
  CHECK(std::abs(min_angle(one[0].code) - kPi) < 1e-12);
  CHECK(enumerate_codes(0).empty());
}

TEST_CASE("enumeration prefix is reproducible") {
  auto a = enumerate_codes(400), b = enumerate_codes(900);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(serialize(a[i].code) == serialize(b[i].code));
    CHECK(a[i].phi == b[i].phi);
  }
  CodeEnumerator e(5);
  int n = 0;
  while (e.next()) ++n;
  CHECK(n == 5);
  CHECK(e.emitted() == 5);
}

TEST_CASE("claimed angle matches a long double recomputation") {
  std::map<std::string, int> checked;
  for (const auto& c : full()) {
    if (c.code.size() > 400 && checked[c.family] >= 2) continue;
    ++checked[c.family];
    CHECK(std::abs(static_cast<double>(slow_min_angle(c.code)) - c.phi_radians()) <= 1e-12);
  }
  for (const char* fam : {"circle-gap", "latitude-rings", "antipodal", "cross-polytope", "equatorial-ring"})
    CHECK(checked[fam] > 0);
}

TEST_CASE("large-angle codes respect the Rankin bound") {
  std::size_t tested = 0;
  for (const auto& c : full()) {
    if (c.phi_radians() <= kPi / 2) continue;
    ++tested;
    CHECK(static_cast<double>(c.code.size()) <= rankin_bound(c.phi_radians()) + 1e-9);
  }
  CHECK(full().size() == 10000);
  CHECK(tested > 0);
}

TEST_CASE("P and D") {
  const ParamGrid grid;
  auto oct = from_rows(3, {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}});
  auto t = P_and_D(oct);
  CHECK(t.dim == 3);
  CHECK(std::abs(t.R - std::log2(6.0) / 3) < 1e-15);
  CHECK(t.cell.bucket == grid.bucket(kPi / 2));
  CHECK(t.cell.rate == RateKey::of(6, 3));
  auto anti = P_and_D(enumerate_codes(1)[0].code);
  CHECK(anti.dim == 2);
  CHECK(anti.R == 0.5);
  CHECK(anti.cell.bucket == grid.bucket(kPi));
  auto again = P_and_D(oct);
  CHECK(again.cell == t.cell);
  CHECK(again.phi == t.phi);
  CHECK_THROWS_AS(P_and_D(from_rows(2, {{1, 0}})), DomainError);
}

TEST_CASE("classification on an empty budget") {
  ClassifyConfig cfg;
  cfg.budget = 0;
  auto c = classify_dimension_multiplicity(cfg);
  CHECK(c.cells.empty());
  CHECK(classification_csv(c) == "phi_bucket,R,label,witness_dims\n");
}

TEST_CASE("classification against direct dimension counts") {
  ClassifyConfig cfg;
  cfg.budget = 2000;
  cfg.steps = 3;
  cfg.stable = 2;
  auto c = classify_dimension_multiplicity(cfg);

  // direct count of distinct dimensions per cell
  const ParamGrid grid;
  std::map<GridCell, std::set<unsigned>> dims;
  for (const auto& e : enumerate_codes(cfg.budget))
    dims[{grid.bucket(e.phi_radians()), RateKey::of(e.code.size(), static_cast<unsigned>(e.code.dim()))}].insert(
        static_cast<unsigned>(e.code.dim()));
  REQUIRE(c.cells.size() == dims.size());
  std::size_t stable = 0;
  for (const auto& l : c.cells) {
    const auto& d = dims.at(l.cell);
    CHECK(std::vector<unsigned>(d.begin(), d.end()) == l.seen_dims);
    if (l.stable) {
      ++stable;
      CHECK(l.infinite_candidate == (d.size() >= static_cast<std::size_t>(cfg.steps)));
    }
    if (l.infinite_candidate) CHECK(l.witness_dims.size() >= static_cast<std::size_t>(cfg.steps));
    for (unsigned w : l.witness_dims) CHECK(d.count(w) == 1);
  }
  CHECK(stable > 0);

  // equatorial rings: R = 1 in every dimension 3..6 at angle pi/q
  for (long q : {40, 48, 56, 64}) {
    const GridCell cell{grid.bucket(kPi / q), RateKey::of(8, 3)};
    auto it = std::find_if(c.cells.begin(), c.cells.end(), [&](const CellLabel& l) { return l.cell == cell; });
    REQUIRE(it != c.cells.end());
    CHECK(it->infinite_candidate);
    CHECK(it->R == 1.0);
    CHECK(it->seen_dims == std::vector<unsigned>{3, 4, 5, 6});
  }
  // antipodal pairs: R = 1/n differs per n, so one dimension per cell
  for (unsigned n = 2; n <= 6; ++n) {
    const GridCell cell{grid.bucket(kPi), RateKey::of(2, n)};
    auto it = std::find_if(c.cells.begin(), c.cells.end(), [&](const CellLabel& l) { return l.cell == cell; });
    REQUIRE(it != c.cells.end());
    CHECK_FALSE(it->infinite_candidate);
    CHECK(it->seen_dims == std::vector<unsigned>{n});
  }
}

TEST_CASE("classification is deterministic") {
  ClassifyConfig cfg;
  cfg.budget = 600;
  CHECK(classification_csv(classify_dimension_multiplicity(cfg)) == classification_csv(classify_dimension_multiplicity(cfg)));
  cfg.oracle = OracleKind::Compression;
  auto a = classify_dimension_multiplicity(cfg);
  CHECK(a.oracle_name.find("lzss") != std::string::npos);
  CHECK(classification_csv(a) == classification_csv(classify_dimension_multiplicity(cfg)));
}

TEST_CASE("membership of the integer lattice and a two-coset packing") {
  const std::vector<double> ds{0.1, 0.05, 0.02};
  auto z = frakP_membership(integers(), 0.2, ds, 0, 2, circle_envelope());
  CHECK(z.member);
  REQUIRE(z.trace.size() == 3);
  for (const auto& r : z.trace) {
    CHECK(r.occupied);
    CHECK(r.margin >= 0.0);
  }
  auto sparse = frakP_membership(cosets(Rational(2, 5)), 0.01, ds, 0, 2, circle_envelope());
  CHECK_FALSE(sparse.member);
  CHECK(sparse.trace.back().margin < -0.5);

  for (std::size_t k = 0; k < ds.size(); ++k) {
    auto single = frakP_membership(integers(), 0.02, ds, k, k, circle_envelope());
    REQUIRE(single.trace.size() == 1);
    const auto p = wrapped_code_point(integers(), make_schedule(ds[k]));
    CHECK(single.member == gamma_eps_member(p, circle_envelope(), 0.02));
  }
  CHECK_THROWS_AS(frakP_membership(integers(), 0.2, ds, 2, 1, circle_envelope()), DomainError);
  CHECK_THROWS_AS(frakP_membership(integers(), 0.2, ds, 0, 3, circle_envelope()), DomainError);
  CHECK_THROWS_AS(frakP_membership(integers(), 0.0, ds, 0, 2, circle_envelope()), DomainError);
}

TEST_CASE("membership is monotone in epsilon") {
  const std::vector<double> ds{0.1, 0.05, 0.02};
  const std::vector<double> eps{0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5, 0.7, 1.0};
  for (const auto& P : {integers(), cosets(Rational(2, 5)), cosets(Rational(1, 2)), cosets(Rational(1, 3))}) {
    bool was = false;
    for (double e : eps) {
      const bool m = frakP_membership(P, e, ds, 0, 2, circle_envelope()).member;
      CHECK((!was || m));
      was = m;
    }
    CHECK(was);
  }
  OptConfig cfg;
  cfg.budget = 3000;
  int last = -1;
  for (double e : eps) {
    cfg.eps = e;
    const int t = tier(opt_experiment(cfg, Catalog::builtin()).verdicts[0].verdict);
    CHECK(t >= last);
    last = t;
  }
}

TEST_CASE("discrepancy offsets on the line") {
  const std::vector<double> ds{0.2, 0.1, 0.05, 0.02};
  struct Case {
    PeriodicSet P;
    double gamma;
  };
  for (const auto& c : {Case{integers(), 1.0}, Case{cosets(Rational(1, 2)), 0.5}, Case{cosets(Rational(2, 5)), 0.4}}) {
    auto r = discrepancy_offset_check(c.P, 0.15, ds, circle_envelope(), Catalog::builtin());
    CHECK(r.gamma == doctest::Approx(c.gamma).epsilon(1e-12));
    CHECK(r.n == 2);
    CHECK(r.predicted == doctest::Approx(-std::log2(c.gamma) / 2).epsilon(1e-12));
    CHECK(r.rows.size() == ds.size());
    CHECK(r.rows.back().occupied);
    CHECK(std::abs(r.measured_tail - r.predicted) <= 0.15);
    CHECK(r.holds);
  }
  CHECK(std::abs(discrepancy_offset_check(cosets(Rational(2, 5)), 0.1, ds, circle_envelope(), Catalog::builtin()).predicted -
                 0.660964047444) < 1e-11);
  CHECK_THROWS_AS(discrepancy_offset_check(integers(), 0.1, {}, circle_envelope(), Catalog::builtin()), DomainError);
}

TEST_CASE("opt verdicts") {
  const auto& cat = Catalog::builtin();
  OptConfig latt;
  auto rep = opt_experiment(latt, cat);
  REQUIRE(rep.verdicts.size() == 2);
  CHECK(rep.kind_label == "Latt");
  CHECK(rep.catalog_version == cat.version());
  CHECK(rep.verdicts[0].verdict == "member");
  CHECK(rep.verdicts[0].candidate == "integer lattice Z");
  for (const auto& v : rep.verdicts) {
    REQUIRE(v.membership);
    bool above = true, below = false;
    for (const auto& r : v.membership->trace) {
      above = above && r.occupied && r.margin > v.membership->slack;
      below = below || (r.occupied && r.margin < -v.membership->slack);
    }
    CHECK(v.verdict == (below ? "non-member" : above ? "member" : "inconclusive"));
  }

  OptConfig per;
  per.kind = OptKind::PerLe;
  per.bound = 40;
  per.dims = {10, 3, 8, 24};
  auto p = opt_experiment(per, cat);
  CHECK(p.kind_label == "Per<=40");
  for (const auto& v : p.verdicts) CHECK(v.verdict == "member (catalog assertion)");
  CHECK(p.verdicts[0].candidate.find("P10c") != std::string::npos);

  per.bound = 1;
  per.dims = {10};
  CHECK(opt_experiment(per, cat).verdicts[0].verdict == "inconclusive");

  OptConfig none;
  none.dims = {9};
  CHECK(opt_experiment(none, cat).verdicts[0].verdict == "inconclusive: no candidate");

  OptConfig f;
  f.kind = OptKind::PerF;
  f.dims = {10};
  f.f_table = {{10, 39}};
  CHECK(opt_experiment(f, cat).verdicts[0].candidate.find("Lambda10") != std::string::npos);
  f.f_table = {{10, 40}};
  CHECK(opt_experiment(f, cat).verdicts[0].verdict == "member (catalog assertion)");
  f.f_table.clear();
  CHECK(opt_experiment(f, cat).verdicts[0].verdict == "inconclusive: no candidate");

  OptConfig bad;
  bad.eps = 0;
  CHECK_THROWS_AS(opt_experiment(bad, cat), DomainError);
  bad.eps = 0.2;
  bad.kind = OptKind::PerLe;
  CHECK_THROWS_AS(opt_experiment(bad, cat), DomainError);
}

TEST_CASE("opt report is byte-identical across runs") {
  OptConfig cfg;
  cfg.budget = 2000;
  const auto a = opt_report_json(opt_experiment(cfg, Catalog::builtin()));
  cfg.workers = 3;
  const auto b = opt_report_json(opt_experiment(cfg, Catalog::builtin()));
  CHECK(a == b);
  CHECK(a.find("\"truncated intersection\"") != std::string::npos);
  CHECK(a.find("\"catalog_version\": \"2024.1\"") != std::string::npos);
}
