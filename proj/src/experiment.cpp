#include "sphcode/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sphcode/error.hpp"
#include "sphcode/format.hpp"

namespace sphcode {

namespace {

constexpr unsigned kMaxRingLevel = 48;

SphericalCode angular_code(std::size_t dim, const std::vector<std::vector<Rational>>& angles) {
  std::vector<SpherePoint> pts;
  pts.reserve(angles.size());
  for (const auto& a : angles) pts.push_back(SpherePoint::from_angles(a));
  return SphericalCode(dim, std::move(pts));
}

EnumeratedCode circle_gap(long p, long q, unsigned level) {
  const long n = 2 * q / p;
  std::vector<std::vector<Rational>> angles;
  for (long k = 0; k < n; ++k) angles.push_back({Rational(k * p, q)});
  return {angular_code(2, angles), Rational(p, q), "circle-gap", level};
}

EnumeratedCode latitude_rings(long q, unsigned level) {
  const double phi = kPi / static_cast<double>(q);
  std::vector<std::vector<Rational>> angles;
  for (long j = 0; j <= q; ++j) {
    const double theta = kPi * static_cast<double>(j) / static_cast<double>(q);
    long m = 1;
    if (j != 0 && j != q) {
      const double r = std::sin(phi / 2) / std::sin(theta);
      m = r >= 1.0 ? 1 : static_cast<long>(std::floor(kPi / std::asin(r) + 1e-9));
    }
    for (long k = 0; k < m; ++k) angles.push_back({Rational(j, q), Rational(2 * k, m)});
  }
  return {angular_code(3, angles), Rational(1, q), "latitude-rings", level};
}

EnumeratedCode antipodal_pair(unsigned n, unsigned level) {
  std::vector<Rational> a(n - 1, Rational(0)), b(n - 1, Rational(0));
  b[0] = 1;
  return {angular_code(n, {a, b}), Rational(1), "antipodal", level};
}

EnumeratedCode cross_polytope(unsigned n, unsigned level) {
  std::vector<std::vector<Rational>> angles;
  for (unsigned axis = 0; axis < n; ++axis)
    for (int sign = 0; sign < 2; ++sign) {
      // x_1 = ... = x_axis-1 = 0 via angles 1/2; then +-e_axis
      std::vector<Rational> a(n - 1, Rational(0));
      for (unsigned i = 0; i < axis && i < n - 1; ++i) a[i] = Rational(1, 2);
      if (axis < n - 1) {
        a[axis] = sign ? Rational(1) : Rational(0);
      } else {
        a[n - 2] = sign ? Rational(3, 2) : Rational(1, 2);
      }
      angles.push_back(a);
    }
  return {angular_code(n, angles), Rational(1, 2), "cross-polytope", level};
}

EnumeratedCode equatorial_ring(unsigned n, long q, unsigned level) {
  const long count = 1L << n;
  std::vector<std::vector<Rational>> angles;
  for (long k = 0; k < count; ++k) {
    std::vector<Rational> a(n - 1, Rational(1, 2));
    a[n - 2] = Rational(k, q);
    angles.push_back(a);
  }
  return {angular_code(n, angles), Rational(1, q), "equatorial-ring", level};
}

}  // namespace

CodeEnumerator::CodeEnumerator(std::size_t budget) : budget_(budget) {}

void CodeEnumerator::fill_level() {
  const unsigned L = ++level_;
  const long q = L;
  pending_.clear();
  cursor_ = 0;
  for (long p = 1; p <= q; ++p)
    if (std::gcd(p, q) == 1) pending_.push_back(circle_gap(p, q, L));
  if (L >= 2 && L <= kMaxRingLevel) pending_.push_back(latitude_rings(q, L));
  if (L >= 3 && L <= 6) {
    pending_.push_back(antipodal_pair(L, L));
    if (L > 3) pending_.push_back(cross_polytope(L, L));
  }
  if (L >= 5 && L <= 8)
    for (unsigned n = 3; n <= 6; ++n) pending_.push_back(equatorial_ring(n, 8 * q, L));
}

std::optional<EnumeratedCode> CodeEnumerator::next() {
  if (emitted_ >= budget_) return std::nullopt;
  while (cursor_ >= pending_.size()) fill_level();
  EnumeratedCode out = std::move(pending_[cursor_++]);
  const double got = min_angle(out.code);
  if (std::abs(got - out.phi_radians()) > 1e-12)
    throw Error("enumerated " + out.family + " code misses its claimed angle: " + format_sig(got) + " vs " +
                format_sig(out.phi_radians()));
  ++emitted_;
  return out;
}

std::vector<EnumeratedCode> enumerate_codes(std::size_t budget) {
  std::vector<EnumeratedCode> out;
  CodeEnumerator e(budget);
  while (auto c = e.next()) out.push_back(std::move(*c));
  return out;
}

CodeTag P_and_D(const SphericalCode& code, const ParamGrid& grid) {
  if (code.size() < 2) throw DomainError("code parameters need at least two points");
  CodeTag t;
  t.dim = static_cast<unsigned>(code.dim());
  t.phi = min_angle(code);
  t.R = rate(code);
  t.cell = {grid.bucket(t.phi), RateKey::of(code.size(), t.dim)};
  return t;
}

ParamGrid grid_from(const std::vector<EnumeratedCode>& codes, Rational resolution) {
  ParamGrid grid(resolution);
  for (const auto& c : codes) grid.record(c.code.size(), static_cast<unsigned>(c.code.dim()), c.phi_radians());
  return grid;
}

Classification classify_dimension_multiplicity(const ClassifyConfig& config) {
  const auto codes = enumerate_codes(config.budget);
  const ParamGrid grid;
  Classification out;
  std::map<GridCell, ValueId> ids;
  Universe u;
  u.complete = false;
  u.g.emplace();
  for (const auto& c : codes) {
    const GridCell cell{grid.bucket(c.phi_radians()), RateKey::of(c.code.size(), static_cast<unsigned>(c.code.dim()))};
    auto [it, fresh] = ids.emplace(cell, static_cast<ValueId>(out.values.size()));
    if (fresh) out.values.push_back(cell);
    u.f.push_back(it->second);
    u.g->push_back(static_cast<ValueId>(c.code.dim()));
  }
  ComplexityOracle oracle;
  if (config.oracle == OracleKind::Compression) {
    EnumeratedSpace space{"codes", codes.size(), [&](std::size_t i) { return serialize(codes[i].code); }};
    oracle = compression_oracle(space);
  } else {
    oracle = ComplexityOracle::structural(codes.size());
  }
  out.oracle_name = oracle.name;
  ClassifierConfig cc;
  cc.c = config.c;
  cc.steps = config.steps;
  cc.first_horizon = config.first_horizon == 0 ? std::max<std::size_t>(out.values.size(), 1) : config.first_horizon;
  cc.strict_budget = config.strict_budget;
  out.state = run_classifier(u, oracle, cc);

  const auto settled = stable_values(out.state, config.stable);
  std::map<ValueId, std::set<unsigned>> seen;
  for (std::size_t i = 0; i < u.size(); ++i) seen[u.f[i]].insert(static_cast<unsigned>((*u.g)[i]));
  for (const auto& [cell, id] : ids) {
    CellLabel l;
    l.cell = cell;
    l.R = cell.rate.value();
    l.infinite_candidate = out.state.A.count(id) > 0;
    l.stable = settled.count(id) > 0;
    std::set<unsigned> wd;
    if (auto it = out.state.witnesses.find(id); it != out.state.witnesses.end())
      for (std::size_t x : it->second) wd.insert(static_cast<unsigned>((*u.g)[x]));
    l.witness_dims.assign(wd.begin(), wd.end());
    l.seen_dims.assign(seen[id].begin(), seen[id].end());
    out.cells.push_back(std::move(l));
  }
  return out;
}

std::string classification_csv(const Classification& c) {
  std::ostringstream out;
  out << "phi_bucket,R,label,witness_dims\n";
  for (const auto& l : c.cells) {
    out << l.cell.bucket << ',' << format_sig(l.R) << ',' << (l.infinite_candidate ? "infinite-candidate" : "finite") << ',';
    for (std::size_t i = 0; i < l.witness_dims.size(); ++i) out << (i ? ";" : "") << l.witness_dims[i];
    out << '\n';
  }
  return out.str();
}

double resolution_slack(unsigned n, double phi, double resolution) {
  return static_cast<double>(n - 1) / (static_cast<double>(n) * phi * std::log(2.0)) * resolution;
}

MembershipReport frakP_membership(const PeriodicSet& packing, double eps, const std::vector<double>& ds, std::size_t k0,
                                  std::size_t k_max, const AlphaEnvelope& env, unsigned workers) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  if (k0 > k_max || k_max >= ds.size()) throw DomainError("need k0 <= k_max < schedule length");
  MembershipReport rep;
  rep.member = true;
  double min_phi = kPi;
  WrapOptions opt;
  opt.workers = workers;
  for (std::size_t k = k0; k <= k_max; ++k) {
    const CodePoint p = wrapped_code_point(packing, make_schedule(ds[k]), opt);
    MembershipRow row{k, ds[k], p.R, p.phi, env.at(p.phi).alpha_hat, 0.0, false};
    row.margin = p.R - (row.alpha_hat - eps);
    row.occupied = row.alpha_hat > 0.0;
    rep.member = rep.member && gamma_eps_member(p, env, eps);
    min_phi = std::min(min_phi, p.phi);
    rep.trace.push_back(row);
  }
  rep.slack = resolution_slack(static_cast<unsigned>(packing.dim() + 1), min_phi, env.step);
  return rep;
}

OffsetReport discrepancy_offset_check(const PeriodicSet& packing, double eps, const std::vector<double>& ds,
                                      const AlphaEnvelope& env, const Catalog& catalog, unsigned workers) {
  if (ds.empty()) throw DomainError("distance schedule is empty");
  OffsetReport rep;
  rep.gamma = discrepancy(packing, catalog).first;
  rep.n = static_cast<unsigned>(packing.dim() + 1);
  rep.predicted = std::log2(1.0 / rep.gamma) / rep.n;
  rep.eps = eps;
  WrapOptions opt;
  opt.workers = workers;
  for (double d : ds) {
    const CodePoint p = wrapped_code_point(packing, make_schedule(d), opt);
    OffsetRow row{d, p.R, p.phi, env.at(p.phi).alpha_hat, 0.0, false};
    row.offset = row.alpha_hat - row.R;
    row.occupied = row.alpha_hat > 0.0;
    rep.rows.push_back(row);
  }
  rep.measured_tail = rep.rows.back().offset;
  rep.holds = rep.rows.back().occupied && rep.measured_tail <= rep.predicted + eps;
  return rep;
}

std::string opt_kind_label(const OptConfig& config) {
  switch (config.kind) {
    case OptKind::Latt: return "Latt";
    case OptKind::PerLe: return "Per<=" + std::to_string(config.bound);
    case OptKind::PerF: return "PerF";
    case OptKind::Per: return "Per";
  }
  return "?";
}

namespace {

bool eligible(const PackingRecord& r, const OptConfig& c, unsigned dim) {
  switch (c.kind) {
    case OptKind::Latt: return r.size == 1;
    case OptKind::PerLe: return r.size <= c.bound;
    case OptKind::PerF: {
      auto it = c.f_table.find(dim);
      return it != c.f_table.end() && r.size <= it->second;
    }
    case OptKind::Per: return true;
  }
  return false;
}

}  // namespace

OptReport opt_experiment(const OptConfig& config, const Catalog& catalog) {
  if (!(config.eps > 0.0)) throw DomainError("epsilon must be positive");
  if (config.kind == OptKind::PerLe && config.bound == 0) throw DomainError("Per<=N needs N >= 1");
  OptReport rep;
  rep.config = config;
  rep.kind_label = opt_kind_label(config);
  rep.catalog_version = catalog.version();
  const std::size_t k_max = config.k_max.value_or(config.ds.empty() ? 0 : config.ds.size() - 1);

  std::optional<ParamGrid> grid;
  for (unsigned dim : config.dims) {
    if (dim == 0) throw DomainError("dimension must be positive");
    OptVerdict v;
    v.dim = dim;
    const PackingRecord* best = nullptr;
    for (const auto* r : catalog.in_dim(dim))
      if (eligible(*r, config, dim) && (!best || r->delta > best->delta)) best = r;
    if (!best) {
      v.verdict = "inconclusive: no candidate";
      rep.verdicts.push_back(std::move(v));
      continue;
    }
    v.candidate = best->description;
    if ((dim == 1 || dim == 2) && best->realization) {
      if (!grid) grid = grid_from(enumerate_codes(config.budget));
      const auto env = empirical_alpha(*grid, dim + 1);
      auto m = frakP_membership(*best->realization, config.eps, config.ds, config.k0, k_max, env, config.workers);
      bool all_above = true, any_below = false;
      for (const auto& row : m.trace) {
        all_above = all_above && row.occupied && row.margin > m.slack;
        any_below = any_below || (row.occupied && row.margin < -m.slack);
      }
      v.verdict = any_below ? "non-member" : (all_above ? "member" : "inconclusive");
      v.membership = std::move(m);
    } else if (best->optimal) {
      v.verdict = "member (catalog assertion)";
    } else {
      v.verdict = "inconclusive";
    }
    rep.verdicts.push_back(std::move(v));
  }
  return rep;
}

std::string opt_report_json(const OptReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  const auto& c = report.config;
  j["kind"] = report.kind_label;
  j["eps"] = round_sig(c.eps);
  auto ds = ordered_json::array();
  for (double d : c.ds) ds.push_back(round_sig(d));
  j["d_schedule"] = ds;
  j["k0"] = c.k0;
  j["k_max"] = c.k_max.value_or(c.ds.empty() ? 0 : c.ds.size() - 1);
  j["catalog_version"] = report.catalog_version;
  j["envelope"] = {{"budget", c.budget}, {"resolution", "1/512"}};
  if (c.kind == OptKind::PerF) {
    ordered_json f;
    for (const auto& [n, v] : c.f_table) f[std::to_string(n)] = v;
    j["f_table"] = f;
  }
  j["labels"] = {"relative to catalog", "relative to envelope", "truncated intersection"};
  auto verdicts = ordered_json::array();
  for (const auto& v : report.verdicts) {
    ordered_json e;
    e["dim"] = v.dim;
    e["verdict"] = v.verdict;
    e["candidate"] = v.candidate;
    if (v.membership) {
      e["slack"] = round_sig(v.membership->slack);
      auto trace = ordered_json::array();
      for (const auto& r : v.membership->trace)
        trace.push_back({{"k", r.k},
                         {"d", round_sig(r.d)},
                         {"R", round_sig(r.R)},
                         {"phi", round_sig(r.phi)},
                         {"alpha_hat", round_sig(r.alpha_hat)},
                         {"margin", round_sig(r.margin)},
                         {"occupied", r.occupied}});
      e["trace"] = trace;
    }
    verdicts.push_back(e);
  }
  j["verdicts"] = verdicts;
  return j.dump(2);
}

}  // namespace sphcode
