#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sphcode/catalog.hpp"
#include "sphcode/error.hpp"
#include "sphcode/experiment.hpp"
#include "sphcode/format.hpp"
#include "sphcode/jamming.hpp"
#include "sphcode/mult_oracle.hpp"
#include "sphcode/packings.hpp"
#include "sphcode/param_space.hpp"
#include "sphcode/sphere_geom.hpp"
#include "sphcode/wrap.hpp"

namespace sphcode::cli {

namespace {

using nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string config;
  std::string out;
  unsigned workers = 1;
  std::string catalog;
  std::string input;
  std::string format = "csv";
  // bounds
  std::string from, to, step;
  // wrap
  double d = 0.0;
  std::string schedule;
  bool no_buffer = false;
  // jam
  double tol = kContactTol;
  std::size_t probe_trials = 0;
  std::optional<std::uint64_t> seed;
  double probe_step = 1e-3;
  // classify, opt, envelope
  std::optional<std::size_t> budget;
  std::string oracle = "structural";
  int steps = 3;
  int stable = 3;
  double c = 4.0;
  std::size_t first_horizon = 0;
  bool strict_budget = false;
  std::string audit;
  std::string kind = "Latt";
  std::string dims = "1,2";
  double eps = 0.2;
  std::string d_schedule = "0.1,0.05,0.02";
  std::size_t k0 = 0;
  std::optional<std::size_t> k_max;
  std::string f_table;
  std::optional<unsigned> dim;
  bool occupied_only = false;
};

void common(CLI::App* sub, Options& o, bool catalog) {
  sub->add_option("--config", o.config, "JSON file of option values; its values override the command line");
  sub->add_option("--out", o.out, "write the result here instead of stdout");
  sub->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1u, 256u));
  if (catalog) sub->add_option("--catalog", o.catalog, "packing catalog JSON (default: built-in)");
}

void build(CLI::App& app, Options& o) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* density = app.add_subcommand("density", "shortest vector, covolume and densities of a packing file");
  common(density, o, false);
  density->add_option("input", o.input, "packing file")->required();
  density->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* bounds = app.add_subcommand("bounds", "KL and Rankin bound curves");
  common(bounds, o, false);
  bounds->add_option("--from", o.from, "first angle")->required();
  bounds->add_option("--to", o.to, "last angle")->required();
  bounds->add_option("--step", o.step, "angle step")->required();

  auto* wrap = app.add_subcommand("wrap", "wrapped spherical code of a packing, or a density-convergence table");
  common(wrap, o, false);
  wrap->add_option("input", o.input, "packing file")->required();
  wrap->add_option("--d", o.d, "minimum distance of the wrapped code");
  wrap->add_option("--schedule", o.schedule, "comma-separated d values for a convergence table");
  wrap->add_flag("--no-buffer", o.no_buffer, "keep buffer points (violates the distance guarantee)");

  auto* jam = app.add_subcommand("jam", "infinitesimal jamming test of a code file");
  common(jam, o, false);
  jam->add_option("input", o.input, "code file")->required();
  jam->add_option("--tol", o.tol, "contact tolerance");
  jam->add_option("--probe-trials", o.probe_trials, "random perturbation trials");
  jam->add_option("--seed", o.seed, "probe seed");
  jam->add_option("--probe-step", o.probe_step, "probe step size");

  auto* classify = app.add_subcommand("classify", "dimension-multiplicity labels of enumerated code cells");
  common(classify, o, false);
  classify->add_option("--budget", o.budget, "number of enumerated codes");
  classify->add_option("--oracle", o.oracle, "structural or compression")
      ->check(CLI::IsMember({"structural", "compression"}));
  classify->add_option("--steps", o.steps, "classifier steps")->check(CLI::Range(1, 64));
  classify->add_option("--stable", o.stable, "steps a label must persist")->check(CLI::Range(1, 64));
  classify->add_option("--c", o.c, "search bound constant");
  classify->add_option("--first-horizon", o.first_horizon, "values listed at step 1 (0 = all cells)");
  classify->add_flag("--strict-budget", o.strict_budget, "fail when a search bound exceeds the budget");
  classify->add_option("--audit", o.audit, "write the audit log (JSON lines) here");

  auto* opt = app.add_subcommand("opt", "envelope-relative OPT membership verdicts");
  common(opt, o, true);
  opt->add_option("--kind", o.kind, "Latt, Per<=N, PerF or Per");
  opt->add_option("--dims", o.dims, "comma-separated packing dimensions");
  opt->add_option("--eps", o.eps, "epsilon");
  opt->add_option("--d-schedule", o.d_schedule, "comma-separated d values");
  opt->add_option("--k0", o.k0, "first schedule index");
  opt->add_option("--k-max", o.k_max, "last schedule index");
  opt->add_option("--budget", o.budget, "codes in the envelope enumeration");
  opt->add_option("--f-table", o.f_table, "F(n) table for PerF, as n:F,n:F");

  auto* envelope = app.add_subcommand("envelope", "empirical alpha envelope of the enumerated codes");
  common(envelope, o, false);
  envelope->add_option("--budget", o.budget, "number of enumerated codes");
  envelope->add_option("--dim", o.dim, "restrict to one ambient dimension");
  envelope->add_flag("--occupied-only", o.occupied_only, "skip empty buckets");

  for (auto* sub : app.get_subcommands({})) sub->callback([&o, sub] { o.command = sub->get_name(); });
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_value(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + config_value(v[i]);
    return s;
  }
  if (v.is_object()) {
    std::string s;
    for (auto it = v.begin(); it != v.end(); ++it) s += (s.empty() ? "" : ",") + it.key() + ":" + config_value(it.value());
    return s;
  }
  return v.dump();
}

std::vector<std::string> config_args(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error&) {
    throw ParseError("config: invalid JSON in " + path, 1, 1);
  }
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  std::vector<std::string> args;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "config") throw UsageError("config: nested 'config' is not allowed");
    if (it.value().is_boolean()) {
      args.push_back("--" + it.key() + "=" + (it.value().get<bool>() ? "true" : "false"));
    } else {
      args.push_back("--" + it.key());
      args.push_back(config_value(it.value()));
    }
  }
  return args;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto v = parse_double(tok);
    if (!v || !(*v > 0.0)) throw UsageError(std::string(what) + ": expected positive numbers, got '" + tok + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError(std::string(what) + ": empty list");
  return out;
}

unsigned parse_unsigned(const std::string& tok, const char* what) {
  auto v = parse_double(tok);
  if (!v || *v < 1 || *v != std::floor(*v) || *v > 1e6)
    throw UsageError(std::string(what) + ": expected a positive integer, got '" + tok + "'");
  return static_cast<unsigned>(*v);
}

std::vector<unsigned> parse_dims(const std::string& text) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_unsigned(tok, "--dims"));
  if (out.empty()) throw UsageError("--dims: empty list");
  return out;
}

std::map<unsigned, std::size_t> parse_f_table(const std::string& text) {
  std::map<unsigned, std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) throw UsageError("--f-table: expected n:F, got '" + tok + "'");
    out[parse_unsigned(tok.substr(0, colon), "--f-table")] = parse_unsigned(tok.substr(colon + 1), "--f-table");
  }
  return out;
}

OptConfig opt_config(const Options& o) {
  OptConfig c;
  if (o.kind == "Latt") {
    c.kind = OptKind::Latt;
  } else if (o.kind == "Per") {
    c.kind = OptKind::Per;
  } else if (o.kind == "PerF") {
    c.kind = OptKind::PerF;
    c.f_table = parse_f_table(o.f_table);
    if (c.f_table.empty()) throw UsageError("kind PerF needs --f-table");
  } else if (o.kind.rfind("Per<=", 0) == 0) {
    c.kind = OptKind::PerLe;
    c.bound = parse_unsigned(o.kind.substr(5), "--kind");
  } else {
    throw UsageError("--kind: expected Latt, Per<=N, PerF or Per, got '" + o.kind + "'");
  }
  c.dims = parse_dims(o.dims);
  if (!(o.eps > 0.0)) throw UsageError("--eps must be positive");
  c.eps = o.eps;
  c.ds = parse_doubles(o.d_schedule, "--d-schedule");
  c.k0 = o.k0;
  c.k_max = o.k_max;
  if (c.k0 > c.k_max.value_or(c.ds.size() - 1) || c.k_max.value_or(0) >= c.ds.size())
    throw UsageError("need k0 <= k-max < schedule length");
  c.budget = o.budget.value_or(10000);
  c.workers = o.workers;
  return c;
}

// Config echo: ordered key/value pairs shared by the CSV and JSON headers.
struct Echo {
  std::vector<std::pair<std::string, std::string>> kv;

  void add(std::string key, std::string value) { kv.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), format_sig(value)); }

  std::string comments(const std::string& command) const {
    std::string s = std::string("# sphcode ") + kToolVersion + "\n# command: " + command + "\n";
    for (const auto& [k, v] : kv) s += "# " + k + ": " + v + "\n";
    return s;
  }
  ordered_json json(const std::string& command) const {
    ordered_json j;
    j["tool"] = std::string("sphcode ") + kToolVersion;
    j["command"] = command;
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
  }
};

std::string base_name(const std::string& path) {
  auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

Catalog load_catalog(const Options& o) { return o.catalog.empty() ? Catalog::builtin() : Catalog::load(o.catalog); }

std::string cmd_density(const Options& o, Echo& e) {
  const auto set = read_packing_file(o.input);
  e.add("input", base_name(o.input));
  e.add("format", o.format);
  const auto r = periodic_center_density(set);
  const std::string exact = r.center_density_exact ? r.center_density_exact->str() : "";
  if (o.format == "json") {
    ordered_json j;
    j["config"] = e.json("density");
    j["dim"] = r.dim;
    j["size"] = r.size;
    j["min_distance"] = round_sig(r.min_distance);
    j["min_distance_sq_exact"] = r.min_distance_sq_exact.str();
    j["covolume"] = round_sig(r.covolume);
    j["covolume_exact"] = r.covolume_exact.str();
    j["center_density"] = round_sig(r.center_density);
    j["density"] = round_sig(r.density);
    j["center_density_exact"] = r.center_density_exact ? ordered_json(exact) : ordered_json(nullptr);
    return j.dump(2) + "\n";
  }
  return e.comments("density") + "dim,size,min_distance,covolume,center_density,density,center_density_exact\n" +
         std::to_string(r.dim) + "," + std::to_string(r.size) + "," + format_sig(r.min_distance) + "," +
         format_sig(r.covolume) + "," + format_sig(r.center_density) + "," + format_sig(r.density) + "," + exact + "\n";
}

std::string cmd_bounds(const Options& o, Echo& e) {
  const double from = parse_angle(o.from), to = parse_angle(o.to), step = parse_angle(o.step);
  if (!(step > 0.0)) throw UsageError("--step must be positive");
  if (!(from > 0.0) || to > kPi + 1e-12 || from > to) throw UsageError("need 0 < from <= to <= pi");
  const double rows = std::floor((to - from) / step + 1e-9) + 1;
  if (rows > 1e6) throw UsageError("too many rows; increase --step");
  e.add("from", from);
  e.add("to", to);
  e.add("step", step);
  std::string s = e.comments("bounds") + "phi,H,rankin\n";
  for (long k = 0; k < static_cast<long>(rows); ++k) {
    const double phi = std::min(from + static_cast<double>(k) * step, kPi);
    s += format_sig(phi) + ",";
    s += (phi <= kPi / 2 ? format_sig(kl_envelope(phi)) : "") + ",";
    s += (phi > kPi / 2 ? format_sig(rankin_bound(phi)) : "") + "\n";
  }
  return s;
}

std::string cmd_wrap(const Options& o, Echo& e) {
  const bool table = !o.schedule.empty();
  if (table == (o.d > 0.0)) throw UsageError("wrap needs exactly one of --d and --schedule");
  const auto set = read_packing_file(o.input);
  e.add("input", base_name(o.input));
  e.add("workers", std::to_string(o.workers));
  if (table) {
    if (o.no_buffer) throw UsageError("--no-buffer applies to a single --d");
    const auto ds = parse_doubles(o.schedule, "--schedule");
    e.add("schedule", o.schedule);
    return e.comments("wrap") + convergence_csv(density_convergence(set, ds, o.workers));
  }
  e.add("d", o.d);
  e.add("buffer", o.no_buffer ? "off" : "on");
  WrapOptions opt;
  opt.buffer = !o.no_buffer;
  opt.workers = o.workers;
  const auto schedule = make_schedule(o.d);
  const auto w = wrap_packing(set, schedule, opt);
  if (set.dim() >= 2) e.add("bands", std::to_string(schedule.bands()));
  e.add("discarded", std::to_string(w.discarded));
  e.add("allowance", w.allowance);
  e.add("min_angle", min_angle(w.code));
  e.add("rate", rate(w.code));
  return e.comments("wrap") + serialize(w.code);
}

std::string cmd_jam(const Options& o, Echo& e) {
  if (o.probe_trials > 0 && !o.seed) throw UsageError("--probe-trials needs --seed");
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  const auto code = read_code_file(o.input);
  e.add("input", base_name(o.input));
  e.add("tol", o.tol);
  ordered_json j;
  const auto v = jam_test(code, o.tol);
  if (o.probe_trials > 0) {
    e.add("probe_trials", std::to_string(o.probe_trials));
    e.add("seed", std::to_string(*o.seed));
    e.add("probe_step", o.probe_step);
  }
  j["config"] = e.json("jam");
  j["verdict"] = ordered_json::parse(verdict_json(v));
  if (o.probe_trials > 0)
    j["probe_improved"] = perturbation_probe(code, o.probe_trials, o.probe_step, *o.seed);
  return j.dump(2) + "\n";
}

std::string cmd_classify(const Options& o, Echo& e) {
  ClassifyConfig c;
  c.budget = o.budget.value_or(2000);
  c.oracle = o.oracle == "compression" ? OracleKind::Compression : OracleKind::Structural;
  c.steps = o.steps;
  c.stable = o.stable;
  if (!(o.c > 0.0)) throw UsageError("--c must be positive");
  c.c = o.c;
  c.first_horizon = o.first_horizon;
  c.strict_budget = o.strict_budget;
  e.add("budget", std::to_string(c.budget));
  e.add("oracle", o.oracle);
  if (c.oracle == OracleKind::Compression) e.add("compressor", kCompressorVersion);
  e.add("steps", std::to_string(c.steps));
  e.add("stable", std::to_string(c.stable));
  e.add("c", c.c);
  e.add("first_horizon", std::to_string(c.first_horizon));
  e.add("strict_budget", c.strict_budget ? "true" : "false");
  const auto result = classify_dimension_multiplicity(c);
  if (!o.audit.empty()) {
    std::ofstream f(o.audit);
    if (!f) throw IoError("cannot write " + o.audit);
    f << audit_jsonl(result.state, [&](ValueId y) {
      const auto& cell = result.values[static_cast<std::size_t>(y)];
      return std::to_string(cell.bucket) + ":" + cell.rate.str();
    });
  }
  return e.comments("classify") + classification_csv(result);
}

std::string cmd_opt(const Options& o, Echo& e) {
  const auto config = opt_config(o);
  const auto catalog = load_catalog(o);
  e.add("catalog", o.catalog.empty() ? "built-in" : base_name(o.catalog));
  e.add("catalog_version", catalog.version());
  const auto report = ordered_json::parse(opt_report_json(opt_experiment(config, catalog)));
  ordered_json j;
  j["config"] = e.json("opt");
  for (auto it = report.begin(); it != report.end(); ++it) j[it.key()] = it.value();
  return j.dump(2) + "\n";
}

std::string cmd_envelope(const Options& o, Echo& e) {
  const std::size_t budget = o.budget.value_or(10000);
  if (budget == 0) throw UsageError("--budget must be positive");
  e.add("budget", std::to_string(budget));
  if (o.dim) e.add("dim", std::to_string(*o.dim));
  const auto env = empirical_alpha(grid_from(enumerate_codes(budget)), o.dim);
  return e.comments("envelope") + envelope_csv(env, o.occupied_only);
}

std::string dispatch(const Options& o) {
  Echo e;
  if (!o.config.empty()) e.add("config", base_name(o.config));
  if (o.command == "density") return cmd_density(o, e);
  if (o.command == "bounds") return cmd_bounds(o, e);
  if (o.command == "wrap") return cmd_wrap(o, e);
  if (o.command == "jam") return cmd_jam(o, e);
  if (o.command == "classify") return cmd_classify(o, e);
  if (o.command == "opt") return cmd_opt(o, e);
  if (o.command == "envelope") return cmd_envelope(o, e);
  throw UsageError("unknown command");
}

// Parses args into o; returns an exit code when parsing ended the run.
std::optional<int> parse(std::vector<std::string> args, Options& o, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spherical codes, sphere packings and their asymptotic parameters", "sphcode"};
  build(app, o);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  return std::nullopt;
}

}  // namespace

double parse_angle(const std::string& text) {
  const auto pi = text.find("pi");
  if (pi == std::string::npos) {
    auto v = parse_double(text);
    if (!v) throw UsageError("bad angle '" + text + "'");
    return *v;
  }
  std::string head = text.substr(0, pi), tail = text.substr(pi + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double coef = 1.0, den = 1.0;
  if (!head.empty()) {
    auto v = parse_double(head);
    if (!v) throw UsageError("bad angle '" + text + "'");
    coef = *v;
  }
  if (!tail.empty()) {
    auto v = tail[0] == '/' ? parse_double(tail.substr(1)) : std::nullopt;
    if (!v || *v == 0.0) throw UsageError("bad angle '" + text + "'");
    den = *v;
  }
  return coef * kPi / den;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Options o;
    if (auto code = parse(args, o, out, err)) return *code;
    if (!o.config.empty()) {
      auto merged = args;
      const auto extra = config_args(o.config);
      merged.insert(merged.end(), extra.begin(), extra.end());
      o = Options{};
      if (auto code = parse(merged, o, out, err)) return *code;
    }
    const std::string result = dispatch(o);
    if (o.out.empty()) {
      out << result;
    } else {
      std::ofstream f(o.out);
      if (!f) throw IoError("cannot write " + o.out);
      f << result;
    }
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetError& e) {
    err << "budget exhausted: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomain;
  }
}

}  // namespace sphcode::cli
