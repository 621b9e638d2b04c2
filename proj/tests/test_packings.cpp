#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "sphcode/catalog.hpp"
#include "sphcode/error.hpp"
#include "sphcode/packings.hpp"
#include "sphcode/sphere_geom.hpp"

using namespace sphcode;

namespace {

QVec q(std::initializer_list<const char*> entries) {
  QVec v;
  for (const char* e : entries) v.push_back(Quad::parse(e));
  return v;
}

Lattice hex() { return Lattice({q({"1", "0"}), q({"1/2", "1/2*sqrt(3)"})}); }
Lattice fcc() { return Lattice({q({"1", "1", "0"}), q({"1", "0", "1"}), q({"0", "1", "1"})}); }
Lattice e8() { return Catalog::builtin().lookup(8, RecordKind::KnownMax).realization->lattice(); }

// Exhaustive search over the coefficient box [-c, c]^n with exact norms.
Quad brute_shortest(const Lattice& lat, long c) {
  const std::size_t n = lat.dim();
  std::vector<long> x(n, -c);
  std::optional<Quad> best;
  while (true) {
    if (!std::all_of(x.begin(), x.end(), [](long v) { return v == 0; })) {
      QVec v(n, Quad(0));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) v[i] += Quad(x[j]) * lat.basis()[j][i];
      Quad norm;
      for (const auto& e : v) norm += e * e;
      if (!best || norm < *best) best = norm;
    }
    std::size_t k = 0;
    while (k < n && x[k] == c) x[k++] = -c;
    if (k == n) break;
    ++x[k];
  }
  return *best;
}

}  // namespace

TEST_CASE("covolume") {
  CHECK(Lattice::integer(4).covolume_exact() == Quad(1));
  CHECK(hex().covolume_exact() == Quad(0, Rational(1, 2), 3));
  CHECK(hex().covolume() == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
  CHECK(fcc().covolume_exact() == Quad(2));
  CHECK(e8().covolume_exact() == Quad(1));
  CHECK(hex().scaled(3.0).covolume() == doctest::Approx(9 * std::sqrt(3.0) / 2).epsilon(1e-14));
  CHECK_THROWS_AS(Lattice({q({"1", "2"}), q({"2", "4"})}), DomainError);
}

TEST_CASE("shortest vectors") {
  CHECK(shortest_vector_length(Lattice::integer(3)) == 1.0);
  CHECK(shortest_vectors(hex()).norm_sq == Quad(1));
  CHECK(shortest_vectors(hex()).minimal.size() == 6);
  auto sv = shortest_vectors(e8());
  CHECK(sv.norm_sq == Quad(2));
  CHECK(sv.length == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sv.minimal.size() == 240);
  CHECK(shortest_vectors(fcc()).minimal.size() == 12);
  std::vector<QVec> big(9, QVec(9, Quad(0)));
  for (int i = 0; i < 9; ++i) big[i][i] = Quad(1);
  CHECK_THROWS_AS(shortest_vectors(Lattice(big)), BudgetError);
}

TEST_CASE("E8 minimal vectors match the coordinate description") {
  // E8 = D8 u (D8 + 1/2): count vectors of squared norm 2 with coordinates in [-2, 2].
  int count = 0;
  std::vector<int> x(8, -2);
  while (true) {
    int sum = 0, norm = 0;
    for (int v : x) {
      sum += v;
      norm += v * v;
    }
    if (norm == 2 && sum % 2 == 0) ++count;
    std::size_t k = 0;
    while (k < 8 && x[k] == 2) x[k++] = -2;
    if (k == 8) break;
    ++x[k];
  }
  std::vector<int> h(8, 1);  // 2 * (half-integer vector)
  int half = 0;
  for (int mask = 0; mask < 256; ++mask) {
    int neg = __builtin_popcount(static_cast<unsigned>(mask));
    if (neg % 2 == 0) ++half;  // (+-1/2)^8 with even minus signs, norm 2
  }
  CHECK(count + half == 240);
  CHECK(shortest_vectors(e8()).minimal.size() == static_cast<std::size_t>(count + half));
}

TEST_CASE("enumeration agrees with brute force on boxes C and C + 2") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> entry(-3, 3);
  std::vector<Lattice> lattices = {Lattice::integer(2), hex(), fcc()};
  while (lattices.size() < 20) {
    const std::size_t n = 2 + lattices.size() % 2;
    std::vector<QVec> b(n, QVec(n, Quad(0)));
    for (auto& row : b)
      for (auto& e : row) e = Quad(entry(rng));
    try {
      lattices.emplace_back(b);
    } catch (const DomainError&) {
    }
  }
  for (const auto& lat : lattices) {
    const long c = std::min(coefficient_box_bound(lat), 8L);
    const Quad got = shortest_vectors(lat).norm_sq;
    CHECK(got == brute_shortest(lat, c));
    CHECK(got == brute_shortest(lat, c + 2));
  }
}

TEST_CASE("periodic minimum distance") {
  PeriodicSet z(Lattice::integer(1));
  CHECK(periodic_min_distance(z) == 1.0);
  PeriodicSet two(Lattice({q({"2"})}), {q({"0"}), q({"2/5"})});
  CHECK(two.size() == 2);
  CHECK(periodic_min_distance_sq(two).first == Quad(Rational(4, 25)));
  PeriodicSet bcc(Lattice::integer(3), {q({"0", "0", "0"}), q({"1/2", "1/2", "1/2"})});
  CHECK(periodic_min_distance(bcc) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
  // Duplicated cosets collapse to the minimal size.
  PeriodicSet dup(Lattice({q({"2"})}), {q({"0"}), q({"2/5"}), q({"12/5"}), q({"-2"})});
  CHECK(dup.size() == 2);
  CHECK(periodic_center_density(dup).center_density == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("center densities") {
  auto start = std::chrono::steady_clock::now();
  auto z = lattice_center_density(Lattice::integer(1));
  CHECK(z.center_density == 0.5);
  CHECK(z.density == doctest::Approx(1.0).epsilon(1e-15));
  auto h = lattice_center_density(hex());
  CHECK(*h.center_density_exact == Quad(0, Rational(1, 6), 3));
  CHECK(std::abs(h.density - 3.14159265358979323846 / std::sqrt(12.0)) <= 1e-9);
  auto e = lattice_center_density(e8());
  REQUIRE(e.center_density_exact.has_value());
  CHECK(*e.center_density_exact == Quad(Rational(1, 16)));
  CHECK(std::abs(e.density - std::pow(kPi, 4) / 384) <= 1e-12);
  auto f = lattice_center_density(fcc());
  CHECK(*f.center_density_exact == Quad(0, Rational(1, 8), 2));
  CHECK(std::abs(f.density - kPi / std::sqrt(18.0)) <= 1e-9);
  auto p = periodic_center_density(PeriodicSet(Lattice({q({"2"})}), {q({"0"}), q({"2/5"})}));
  CHECK(*p.center_density_exact == Quad(Rational(1, 5)));
  CHECK(p.density == doctest::Approx(0.4).epsilon(1e-15));
  for (auto* lat : {&hex, &fcc, &e8}) {
    auto l = (*lat)();
    auto a = lattice_center_density(l), b = periodic_center_density(PeriodicSet(l));
    CHECK(a.center_density == b.center_density);
    CHECK(*a.center_density_exact == *b.center_density_exact);
  }
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
}

TEST_CASE("rescaling preserves density") {
  PeriodicSet h(hex());
  CHECK(rescale_to_radius(h, 0.5).lattice().scale() == doctest::Approx(1.0).epsilon(1e-15));
  auto z = rescale_to_radius(PeriodicSet(Lattice::integer(1)), 0.05);
  CHECK(periodic_min_distance(z) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(packing_density(z) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& set : {h, PeriodicSet(fcc()), PeriodicSet(Lattice({q({"2"})}), {q({"0"}), q({"2/5"})})}) {
    for (double d : {0.5, 0.1, 0.01}) {
      auto s = rescale_to_radius(set, d);
      CHECK(std::abs(packing_density(s) - packing_density(set)) <= 1e-12);
      CHECK(periodic_min_distance(s) == doctest::Approx(2 * d).epsilon(1e-13));
    }
    // Rational scaling of the exact part keeps the exact density.
    std::vector<QVec> b = set.lattice().basis();
    for (auto& row : b)
      for (auto& e : row) e *= Quad(Rational(3, 7));
    std::vector<QVec> t = set.translations();
    for (auto& row : t)
      for (auto& e : row) e *= Quad(Rational(3, 7));
    auto scaled = periodic_center_density(PeriodicSet(Lattice(b), t));
    CHECK(*scaled.center_density_exact == *periodic_center_density(set).center_density_exact);
  }
}

TEST_CASE("discrepancy") {
  const auto& cat = Catalog::builtin();
  auto [g1, d1] = discrepancy(PeriodicSet(hex()), cat);
  CHECK(g1 == 1.0);
  CHECK(d1 == 0.0);
  auto [g2, d2] = discrepancy(PeriodicSet(Lattice({q({"2"})}), {q({"0"}), q({"2/5"})}), cat);
  CHECK(g2 == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(d2 == doctest::Approx(0.6).epsilon(1e-14));
  auto [g3, d3] = discrepancy(PeriodicSet(Lattice::integer(3)), cat);
  CHECK(g3 == doctest::Approx(std::sqrt(18.0) / 6).epsilon(1e-12));
  CHECK_THROWS_AS(discrepancy(PeriodicSet(Lattice::integer(9)), cat), BudgetError);
  CHECK_THROWS_WITH_AS(discrepancy(0.95, 2, cat), doctest::Contains("catalog violation"), DomainError);
  CHECK_THROWS_AS(discrepancy(0.5, 11, cat), DomainError);
}

TEST_CASE("default catalog") {
  const auto& cat = Catalog::builtin();
  auto& e8rec = cat.lookup(8, RecordKind::KnownMax);
  CHECK(e8rec.description.find("E8") != std::string::npos);
  CHECK(e8rec.realization->is_lattice());
  auto& ten = cat.lookup(10, RecordKind::Periodic);
  CHECK(ten.size == 40);
  CHECK(ten.optimal);
  CHECK(cat.best(10).kind == RecordKind::Periodic);
  CHECK_THROWS_AS(cat.lookup(11, RecordKind::KnownMax), DomainError);
  for (unsigned n : {1u, 2u, 3u, 8u, 24u}) CHECK(cat.lookup(n, RecordKind::KnownMax).optimal);
  for (unsigned n = 1; n <= 8; ++n) CHECK(cat.best(n).delta > 0.0);
  for (const auto& r : cat.records()) {
    if (r.center_delta_exact) CHECK(r.center_delta_exact->to_double() == doctest::Approx(r.center_delta).epsilon(1e-13));
    if (r.realization) {
      auto rep = periodic_center_density(*r.realization);
      REQUIRE(rep.center_density_exact.has_value());
      CHECK(*rep.center_density_exact == *r.center_delta_exact);
    }
  }
}

TEST_CASE("catalog schema errors report lines") {
  const char* bad_kind = "{\n  \"version\": \"t\",\n  \"records\": [\n    {\"dim\": 1, \"kind\": \"lattice\", \"delta\": 1.0, \"center_delta\": 0.5, \"description\": \"Z\", \"source\": \"s\"},\n    {\"dim\": 2, \"kind\": \"blob\", \"delta\": 0.5, \"center_delta\": 0.5, \"description\": \"x\", \"source\": \"s\"}\n  ]\n}\n";
  try {
    Catalog::parse(bad_kind);
    FAIL("expected schema error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  try {
    Catalog::parse("{\n \"version\": \"t\",\n \"records\": [ {\"dim\": 1,, } ]\n}");
    FAIL("expected JSON error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(Catalog::parse("{\"records\": []}"), ParseError);
  CHECK_THROWS_AS(Catalog::parse("{\"version\": \"t\", \"records\": [{\"dim\": 1, \"kind\": \"lattice\", \"delta\": 1.5, \"center_delta\": 0.75, \"description\": \"\", \"source\": \"\"}]}"), ParseError);
  CHECK_THROWS_AS(Catalog::load("/nonexistent/catalog.json"), IoError);
}

TEST_CASE("packing text format") {
  auto set = parse_packing("# hexagonal\ndim 2\nbasis\n1 0\n1/2 1/2*sqrt(3)\n");
  CHECK(set.is_lattice());
  CHECK(parse_packing(format_packing(set)).lattice().basis() == set.lattice().basis());
  auto two = parse_packing("dim 1\nbasis\n2\ntranslations\n0\n2/5\n");
  CHECK(two.size() == 2);
  CHECK(format_packing(two) == "dim 1\nbasis\n2\ntranslations\n0\n2/5\n");
  try {
    parse_packing("dim 2\nbasis\n1 0\n1/2 sqrt(x)\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 5);
  }
  CHECK_THROWS_AS(parse_packing("dim 2\nbasis\n1 0\n"), ParseError);
  CHECK_THROWS_AS(parse_packing("dim 2\nbasis\n1 0\n2 0\n"), ParseError);
  CHECK_THROWS_AS(parse_packing("dimension 2\n"), ParseError);
  CHECK_THROWS_AS(parse_packing("dim 2\nbasis\n1 0 0\n0 1\n"), ParseError);
  auto scaled = parse_packing("dim 1\nscale 0.1\nbasis\n1\n");
  CHECK(periodic_min_distance(scaled) == doctest::Approx(0.1));
}
