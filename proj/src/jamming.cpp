#include "sphcode/jamming.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "sphcode/error.hpp"
#include "sphcode/field.hpp"
#include "sphcode/format.hpp"
#include "sphcode/simplex.hpp"

namespace sphcode {

namespace {

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s(0);
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

template <class T>
std::vector<std::vector<T>> rotation_rows(const std::vector<std::vector<T>>& x, std::size_t n) {
  const std::size_t count = x.size();
  Matrix<T> gens(0, 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      std::vector<T> row(count * n, T(0));
      for (std::size_t i = 0; i < count; ++i) {
        row[i * n + a] = x[i][b];
        row[i * n + b] = -x[i][a];
      }
      gens.append_row(row);
    }
  const std::size_t r = row_reduce(gens).size();
  std::vector<std::vector<T>> out;
  for (std::size_t i = 0; i < r; ++i) out.push_back(gens.row(i));
  return out;
}

Motion to_motion(const std::vector<double>& flat, std::size_t n) {
  Motion m(flat.size() / n, std::vector<double>(n));
  for (std::size_t i = 0; i < flat.size(); ++i) m[i / n][i % n] = flat[i];
  return m;
}

template <class T>
std::vector<double> to_doubles(const std::vector<T>& v) {
  std::vector<double> out;
  for (const auto& e : v) out.push_back(FieldTraits<T>::to_double(e));
  return out;
}

std::vector<double> normalize_inf(std::vector<double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  if (m > 0.0)
    for (auto& e : v) e /= m;
  return v;
}

template <class T>
JamVerdict decide(const std::vector<std::vector<T>>& x, const ContactGraph& g) {
  const std::size_t count = x.size(), n = x[0].size(), vars = count * n;
  JamVerdict v;
  v.contacts = g.edges.size();
  v.exact = g.exact;
  const auto rot = rotation_rows(x, n);
  v.rotation_space_dim = rot.size();

  std::vector<std::pair<std::size_t, std::size_t>> antipodal, contacts;
  for (const auto& [i, j] : g.edges) {
    bool opposite = true;
    for (std::size_t k = 0; k < n; ++k) opposite = opposite && field_is_zero(T(x[i][k] + x[j][k]));
    (opposite ? antipodal : contacts).emplace_back(i, j);
  }

  // Variables: u = v + 1 in [0, 2], then one slack per non-antipodal contact.
  LinearProgram<T> lp(vars + contacts.size());
  for (std::size_t e = 0; e < contacts.size(); ++e) lp.objective[vars + e] = T(1);
  Matrix<T> flex(0, 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<T> row(lp.num_vars, T(0));
    T rhs(0);
    for (std::size_t k = 0; k < n; ++k) {
      row[i * n + k] = x[i][k];
      rhs += x[i][k];
    }
    flex.append_row(std::vector<T>(row.begin(), row.begin() + static_cast<long>(vars)));
    lp.add_eq(std::move(row), rhs);
  }
  for (const auto& r : rot) {
    std::vector<T> row(lp.num_vars, T(0));
    T rhs(0);
    for (std::size_t j = 0; j < vars; ++j) {
      row[j] = r[j];
      rhs += r[j];
    }
    flex.append_row(r);
    lp.add_eq(std::move(row), rhs);
  }
  for (const auto& [i, j] : antipodal)
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<T> row(lp.num_vars, T(0));
      row[i * n + k] = T(1);
      row[j * n + k] = T(1);
      flex.append_row(std::vector<T>(row.begin(), row.begin() + static_cast<long>(vars)));
      lp.add_eq(std::move(row), T(2));
    }
  for (std::size_t e = 0; e < contacts.size(); ++e) {
    const auto [i, j] = contacts[e];
    std::vector<T> row(lp.num_vars, T(0));
    for (std::size_t k = 0; k < n; ++k) {
      const T diff = x[i][k] - x[j][k];
      row[i * n + k] = diff;
      row[j * n + k] = -diff;
    }
    flex.append_row(std::vector<T>(row.begin(), row.begin() + static_cast<long>(vars)));
    row[vars + e] = T(-1);
    lp.add_eq(std::move(row), T(0));
  }
  for (std::size_t j = 0; j < vars; ++j) {
    std::vector<T> row(lp.num_vars, T(0));
    row[j] = T(1);
    lp.add_le(std::move(row), T(2));
  }

  const auto res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) throw Error("jamming LP is not solvable; the cone always contains 0");
  v.lp_optimum = FieldTraits<T>::to_double(res.value);
  std::vector<double> witness;
  if (field_sign(res.value) > 0) {
    v.reason = "lp";
    for (std::size_t j = 0; j < vars; ++j) witness.push_back(FieldTraits<T>::to_double(T(res.x[j] - T(1))));
  } else {
    const auto null = nullspace(flex);
    if (null.empty()) {
      v.status = JamStatus::InfinitesimallyJammed;
      v.reason = "certificate";
      return v;
    }
    v.reason = "flex";
    witness = normalize_inf(to_doubles(null.front()));
  }
  v.status = JamStatus::Unjammed;
  v.witness = to_motion(witness, n);
  for (const auto& [i, j] : contacts) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double diff = FieldTraits<T>::to_double(x[i][k]) - FieldTraits<T>::to_double(x[j][k]);
      s += diff * ((*v.witness)[i][k] - (*v.witness)[j][k]);
    }
    v.margin = std::max(v.margin, s);
  }
  return v;
}

std::vector<double> tangent_at(const std::vector<double>& x) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (std::abs(x[i]) < std::abs(x[k])) k = i;
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = (i == k ? 1.0 : 0.0) - x[k] * x[i];
  return normalize_inf(t);
}

double raw_min_angle(const std::vector<std::vector<double>>& x) {
  double best = -1.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) best = std::max(best, dot(x[i], x[j]));
  return std::acos(std::clamp(best, -1.0, 1.0));
}

}  // namespace

bool ContactGraph::has_rattler() const { return std::find(rattler.begin(), rattler.end(), true) != rattler.end(); }

ContactGraph contact_graph(const SphericalCode& code, double tol) {
  if (code.size() < 2) throw DomainError("contact graph needs at least 2 points");
  ContactGraph g;
  g.size = code.size();
  g.tol = tol;
  g.phi = min_angle(code);
  g.rattler.assign(code.size(), true);
  if (auto exact = code.exact_coords()) {
    g.exact = true;
    g.tol = 0.0;
    std::optional<Quad> best;
    for (std::size_t i = 0; i < code.size(); ++i)
      for (std::size_t j = i + 1; j < code.size(); ++j) {
        const Quad d = dot((*exact)[i], (*exact)[j]);
        if (!best || d > *best) best = d;
      }
    for (std::size_t i = 0; i < code.size(); ++i)
      for (std::size_t j = i + 1; j < code.size(); ++j)
        if (dot((*exact)[i], (*exact)[j]) == *best) g.edges.emplace_back(i, j);
  } else {
    for (std::size_t i = 0; i < code.size(); ++i)
      for (std::size_t j = i + 1; j < code.size(); ++j)
        if (angular_distance(code[i], code[j]) <= g.phi + tol) g.edges.emplace_back(i, j);
  }
  for (const auto& [i, j] : g.edges) g.rattler[i] = g.rattler[j] = false;
  return g;
}

std::vector<Motion> rotation_space(const SphericalCode& code) {
  std::vector<std::vector<double>> x;
  for (const auto& p : code.points()) x.push_back(p.coords());
  std::vector<Motion> out;
  if (auto exact = code.exact_coords()) {
    for (const auto& r : rotation_rows(*exact, code.dim())) out.push_back(to_motion(to_doubles(r), code.dim()));
  } else {
    for (const auto& r : rotation_rows(x, code.dim())) out.push_back(to_motion(r, code.dim()));
  }
  return out;
}

std::string_view status_name(JamStatus s) {
  return s == JamStatus::InfinitesimallyJammed ? "InfinitesimallyJammed" : "Unjammed";
}

JamVerdict jam_test(const SphericalCode& code, double tol) {
  const auto g = contact_graph(code, tol);
  if (g.has_rattler()) {
    JamVerdict v;
    v.status = JamStatus::Unjammed;
    v.reason = "rattler";
    v.exact = g.exact;
    v.contacts = g.edges.size();
    v.rotation_space_dim = rotation_space(code).size();
    Motion m(code.size(), std::vector<double>(code.dim(), 0.0));
    for (std::size_t i = 0; i < code.size(); ++i)
      if (g.rattler[i]) v.rattlers.push_back(i);
    m[v.rattlers.front()] = tangent_at(code[v.rattlers.front()].coords());
    v.witness = std::move(m);
    return v;
  }
  if (g.exact) return decide(*code.exact_coords(), g);
  std::vector<std::vector<double>> x;
  for (const auto& p : code.points()) x.push_back(p.coords());
  return decide(x, g);
}

SphericalCode apply_motion(const SphericalCode& code, const Motion& motion, double step) {
  if (motion.size() != code.size()) throw DomainError("motion size does not match the code");
  std::vector<SpherePoint> pts;
  for (std::size_t i = 0; i < code.size(); ++i) {
    std::vector<double> y = code[i].coords();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += step * motion[i][k];
    const double norm = std::sqrt(dot(y, y));
    for (auto& e : y) e /= norm;
    pts.push_back(SpherePoint::from_coords(std::move(y)));
  }
  return SphericalCode(code.dim(), std::move(pts));
}

bool perturbation_probe(const SphericalCode& code, std::size_t trials, double step, std::uint64_t seed) {
  if (!(step > 0.0)) return false;
  std::vector<std::vector<double>> x;
  for (const auto& p : code.points()) x.push_back(p.coords());
  const double base = raw_min_angle(x);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> y = x;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> g(x[i].size());
      for (auto& e : g) e = gauss(rng);
      const double along = dot(g, x[i]);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] -= along * x[i][k];
      const double gn = std::sqrt(dot(g, g));
      for (std::size_t k = 0; k < g.size(); ++k) y[i][k] = x[i][k] + step * g[k] / gn;
      const double yn = std::sqrt(dot(y[i], y[i]));
      for (auto& e : y[i]) e /= yn;
    }
    if (raw_min_angle(y) > base + step * step) return true;
  }
  return false;
}

std::string verdict_json(const JamVerdict& v) {
  nlohmann::ordered_json j;
  j["status"] = status_name(v.status);
  j["reason"] = v.reason;
  j["exact"] = v.exact;
  j["contacts"] = v.contacts;
  j["rattlers"] = v.rattlers;
  j["rotation_space_dim"] = v.rotation_space_dim;
  j["lp_optimum"] = round_sig(v.lp_optimum);
  j["margin"] = round_sig(v.margin);
  if (v.witness) {
    auto w = nlohmann::ordered_json::array();
    for (const auto& t : *v.witness) {
      auto row = nlohmann::ordered_json::array();
      for (double e : t) row.push_back(round_sig(e));
      w.push_back(row);
    }
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace sphcode
