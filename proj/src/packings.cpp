#include "sphcode/packings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "sphcode/error.hpp"
#include "sphcode/format.hpp"
#include "sphcode/sphere_geom.hpp"

namespace sphcode {

namespace {

Quad dot(const QVec& a, const QVec& b) {
  Quad s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Upper-triangular R with G = R^T R.
std::vector<std::vector<double>> cholesky_upper(const Matrix<Quad>& g) {
  const std::size_t n = g.rows();
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double diag = g(i, i).to_double();
    for (std::size_t k = 0; k < i; ++k) diag -= r[k][i] * r[k][i];
    if (!(diag > 0.0)) throw DomainError("Gram matrix is not positive definite");
    r[i][i] = std::sqrt(diag);
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = g(i, j).to_double();
      for (std::size_t k = 0; k < i; ++k) v -= r[k][i] * r[k][j];
      r[i][j] = v / r[i][i];
    }
  }
  return r;
}

// Visits every integer x with ||R (x - c)||^2 <= radius_sq (Fincke-Pohst).
void enumerate_ball(const std::vector<std::vector<double>>& r, const std::vector<double>& c, double radius_sq,
                    const std::function<void(const std::vector<long>&)>& visit) {
  const std::size_t n = r.size();
  std::vector<long> x(n, 0);
  std::function<void(std::size_t, double)> level = [&](std::size_t i, double used) {
    double shift = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) shift += r[i][j] / r[i][i] * (static_cast<double>(x[j]) - c[j]);
    const double center = c[i] - shift;
    const double room = radius_sq - used;
    if (room < 0.0) return;
    const double half = std::sqrt(room) / r[i][i];
    const long lo = static_cast<long>(std::ceil(center - half - 1e-9));
    const long hi = static_cast<long>(std::floor(center + half + 1e-9));
    for (long v = lo; v <= hi; ++v) {
      x[i] = v;
      const double y = r[i][i] * (static_cast<double>(v) - center);
      const double next = used + y * y;
      if (next > radius_sq * (1.0 + 1e-9) + 1e-12) continue;
      if (i == 0)
        visit(x);
      else
        level(i - 1, next);
    }
  };
  if (n > 0) level(n - 1, 0.0);
}

QVec combine(const Lattice& lat, const std::vector<long>& coeffs) {
  QVec v(lat.dim(), Quad(0));
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] == 0) continue;
    const Quad c(coeffs[j]);
    for (std::size_t i = 0; i < lat.dim(); ++i) v[i] += c * lat.basis()[j][i];
  }
  return v;
}

void require_enumerable(std::size_t dim) {
  if (dim > kMaxEnumerationDim)
    throw BudgetError("enumeration budget: dimension " + std::to_string(dim) + " exceeds " +
                      std::to_string(kMaxEnumerationDim));
}

Quad pow_quad(Quad base, std::size_t e) {
  Quad out(1);
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

Lattice::Lattice(std::vector<QVec> basis, double scale) : basis_(std::move(basis)), scale_(scale) {
  const std::size_t n = basis_.size();
  if (n == 0) throw DomainError("lattice needs at least one basis vector");
  for (const auto& v : basis_)
    if (v.size() != n) throw DomainError("lattice basis must be square");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw DomainError("lattice scale must be positive");
  if (determinant(matrix()).is_zero()) throw DomainError("singular lattice basis");
}

Lattice Lattice::integer(std::size_t n) {
  std::vector<QVec> b(n, QVec(n, Quad(0)));
  for (std::size_t i = 0; i < n; ++i) b[i][i] = Quad(1);
  return Lattice(std::move(b));
}

Lattice Lattice::scaled(double factor) const {
  Lattice out = *this;
  out.scale_ *= factor;
  if (!(out.scale_ > 0.0) || !std::isfinite(out.scale_)) throw DomainError("scale factor must be positive");
  return out;
}

Matrix<Quad> Lattice::matrix() const {
  const std::size_t n = dim();
  Matrix<Quad> m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = basis_[j][i];
  return m;
}

Matrix<Quad> Lattice::gram() const {
  const std::size_t n = dim();
  Matrix<Quad> g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) g(i, j) = g(j, i) = dot(basis_[i], basis_[j]);
  return g;
}

Quad Lattice::covolume_exact() const {
  Quad d = determinant(matrix());
  return d.sign() < 0 ? -d : d;
}

double Lattice::covolume() const {
  return covolume_exact().to_double() * std::pow(scale_, static_cast<double>(dim()));
}

std::vector<double> Lattice::point(const std::vector<long>& coeffs) const {
  std::vector<double> p(dim(), 0.0);
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    for (std::size_t i = 0; i < dim(); ++i) p[i] += static_cast<double>(coeffs[j]) * basis_[j][i].to_double();
  for (auto& v : p) v *= scale_;
  return p;
}

PeriodicSet::PeriodicSet(Lattice lattice) : PeriodicSet(lattice, {QVec(lattice.dim(), Quad(0))}) {}

PeriodicSet::PeriodicSet(Lattice lattice, std::vector<QVec> translations) : lattice_(std::move(lattice)) {
  const std::size_t n = lattice_.dim();
  if (translations.empty()) translations.push_back(QVec(n, Quad(0)));
  for (const auto& t : translations)
    if (t.size() != n) throw DomainError("translation has wrong dimension");
  const QVec origin = translations.front();
  const Matrix<Quad> inv = inverse(lattice_.matrix());

  std::vector<QVec> coeffs;  // reduced coefficients in [0, 1)
  for (auto t : translations) {
    for (std::size_t i = 0; i < n; ++i) t[i] -= origin[i];
    QVec c = inv * t;
    for (auto& ci : c) ci -= Quad(ci.floor());
    if (std::find(coeffs.begin(), coeffs.end(), c) == coeffs.end()) coeffs.push_back(std::move(c));
  }
  std::sort(coeffs.begin(), coeffs.end());
  const Matrix<Quad> b = lattice_.matrix();
  for (const auto& c : coeffs) translations_.push_back(b * c);
}

PeriodicSet PeriodicSet::scaled(double factor) const {
  PeriodicSet out = *this;
  out.lattice_ = lattice_.scaled(factor);
  return out;
}

std::vector<double> PeriodicSet::translation(std::size_t i) const {
  std::vector<double> v;
  for (const auto& c : translations_[i]) v.push_back(c.to_double() * lattice_.scale());
  return v;
}

ShortestVectors shortest_vectors(const Lattice& lattice) {
  require_enumerable(lattice.dim());
  const Matrix<Quad> g = lattice.gram();
  const auto r = cholesky_upper(g);
  double radius_sq = g(0, 0).to_double();
  for (std::size_t i = 1; i < g.rows(); ++i) radius_sq = std::min(radius_sq, g(i, i).to_double());

  ShortestVectors out;
  bool have = false;
  enumerate_ball(r, std::vector<double>(lattice.dim(), 0.0), radius_sq, [&](const std::vector<long>& x) {
    if (std::all_of(x.begin(), x.end(), [](long v) { return v == 0; })) return;
    QVec v = combine(lattice, x);
    Quad norm = dot(v, v);
    if (!have || norm < out.norm_sq) {
      out.norm_sq = norm;
      out.minimal.clear();
      have = true;
    }
    if (norm == out.norm_sq) out.minimal.push_back(x);
  });
  if (!have) throw DomainError("shortest vector enumeration found no candidate");
  out.length = std::sqrt(out.norm_sq.to_double()) * lattice.scale();
  return out;
}

double shortest_vector_length(const Lattice& lattice) { return shortest_vectors(lattice).length; }

std::pair<Quad, double> periodic_min_distance_sq(const PeriodicSet& set) {
  const Lattice& lat = set.lattice();
  ShortestVectors sv = shortest_vectors(lat);
  Quad best = sv.norm_sq;
  if (set.size() > 1) {
    const Matrix<Quad> g = lat.gram();
    const auto r = cholesky_upper(g);
    const Matrix<Quad> inv = inverse(lat.matrix());
    const double radius_sq = best.to_double();
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j) {
        QVec t = set.translations()[i];
        for (std::size_t k = 0; k < t.size(); ++k) t[k] -= set.translations()[j][k];
        QVec tc = inv * t;
        std::vector<double> center;
        for (const auto& c : tc) center.push_back(-c.to_double());
        enumerate_ball(r, center, radius_sq, [&](const std::vector<long>& x) {
          QVec v = combine(lat, x);
          for (std::size_t k = 0; k < v.size(); ++k) v[k] += t[k];
          Quad norm = dot(v, v);
          if (norm < best) best = norm;
        });
      }
  }
  return {best, std::sqrt(best.to_double()) * lat.scale()};
}

double periodic_min_distance(const PeriodicSet& set) { return periodic_min_distance_sq(set).second; }

long coefficient_box_bound(const Lattice& lattice) {
  const Matrix<Quad> inv = inverse(lattice.matrix());
  double inf_norm = 0.0;
  for (std::size_t i = 0; i < inv.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < inv.cols(); ++j) row += std::abs(inv(i, j).to_double());
    inf_norm = std::max(inf_norm, row);
  }
  double shortest_basis = 1e300;
  for (const auto& b : lattice.basis()) shortest_basis = std::min(shortest_basis, std::sqrt(dot(b, b).to_double()));
  return static_cast<long>(std::ceil(shortest_basis * inf_norm * std::sqrt(static_cast<double>(lattice.dim())) - 1e-12));
}

double unit_ball_volume(std::size_t n) {
  // V_n = 2 pi / n * V_{n-2}
  double v = n % 2 == 0 ? 1.0 : 2.0;
  for (std::size_t k = n % 2 == 0 ? 2 : 3; k <= n; k += 2) v *= 2.0 * kPi / static_cast<double>(k);
  return v;
}

DensityReport periodic_center_density(const PeriodicSet& set) {
  DensityReport rep;
  const std::size_t n = set.dim();
  rep.dim = n;
  rep.size = set.size();
  auto [ell_sq, ell] = periodic_min_distance_sq(set);
  rep.min_distance = ell;
  rep.min_distance_sq_exact = ell_sq;
  rep.covolume_exact = set.lattice().covolume_exact();
  rep.covolume = set.lattice().covolume();
  const double nd = static_cast<double>(n);
  rep.center_density = static_cast<double>(rep.size) * std::pow(ell / 2.0, nd) / rep.covolume;
  rep.density = rep.center_density * unit_ball_volume(n);
  try {
    // delta = N (l^2/4)^(n/2) / |L|, exact when l itself is quadratic or n is even.
    Quad quarter = ell_sq / Quad(4);
    Quad value = pow_quad(quarter, n / 2);
    if (n % 2 == 1) {
      if (!ell_sq.is_rational()) throw DomainError("irrational length");
      auto root = Quad::sqrt_of(ell_sq.rational_part());
      if (!root) throw DomainError("no exact root");
      value *= *root / Quad(2);
    }
    rep.center_density_exact = Quad(static_cast<long>(rep.size)) * value / rep.covolume_exact;
  } catch (const DomainError&) {
    rep.center_density_exact.reset();
  }
  return rep;
}

DensityReport lattice_center_density(const Lattice& lattice) { return periodic_center_density(PeriodicSet(lattice)); }

double packing_density(const PeriodicSet& set) { return periodic_center_density(set).density; }

PeriodicSet rescale_to_radius(const PeriodicSet& set, double d) {
  if (!(d > 0.0)) throw DomainError("packing radius must be positive");
  return set.scaled(2.0 * d / periodic_min_distance(set));
}

Lattice rescale_to_radius(const Lattice& lattice, double d) {
  if (!(d > 0.0)) throw DomainError("packing radius must be positive");
  return lattice.scaled(2.0 * d / shortest_vector_length(lattice));
}

namespace {

struct LineTokens {
  int line;
  std::vector<std::pair<std::string, int>> toks;
};

}  // namespace

PeriodicSet parse_packing(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<LineTokens> lines;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    LineTokens lt{line_no, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i >= raw.size()) break;
      std::size_t s = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      lt.toks.push_back({raw.substr(s, i - s), static_cast<int>(s) + 1});
    }
    if (!lt.toks.empty()) lines.push_back(std::move(lt));
  }

  auto quad_row = [](const LineTokens& lt, std::size_t n) {
    if (lt.toks.size() != n)
      throw ParseError("expected " + std::to_string(n) + " entries", lt.line, lt.toks.front().second);
    QVec row;
    for (const auto& [tok, col] : lt.toks) {
      try {
        row.push_back(Quad::parse(tok));
      } catch (const Error& e) {
        throw ParseError("bad entry '" + tok + "'", lt.line, col);
      }
    }
    return row;
  };

  std::size_t idx = 0;
  if (lines.empty()) throw ParseError("empty packing file", 1, 1);
  const auto& head = lines[idx++];
  if (head.toks.size() != 2 || head.toks[0].first != "dim") throw ParseError("expected 'dim <n>'", head.line, 1);
  std::size_t n = 0;
  try {
    std::size_t pos = 0;
    long v = std::stol(head.toks[1].first, &pos);
    if (pos != head.toks[1].first.size() || v < 1) throw std::invalid_argument("dim");
    n = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("bad dimension", head.line, head.toks[1].second);
  }

  double scale = 1.0;
  std::vector<QVec> basis, translations;
  int section = 0;  // 1 basis, 2 translations
  int basis_line = head.line;
  for (; idx < lines.size(); ++idx) {
    const auto& lt = lines[idx];
    const std::string& first = lt.toks.front().first;
    if (first == "basis" && lt.toks.size() == 1) {
      section = 1;
      basis_line = lt.line;
    } else if (first == "translations" && lt.toks.size() == 1) {
      section = 2;
    } else if (first == "scale") {
      if (lt.toks.size() != 2) throw ParseError("expected 'scale <value>'", lt.line, 1);
      auto v = parse_double(lt.toks[1].first);
      if (!v || !(*v > 0.0)) throw ParseError("bad scale", lt.line, lt.toks[1].second);
      scale = *v;
    } else if (section == 1) {
      if (basis.size() == n) throw ParseError("too many basis rows", lt.line, 1);
      basis.push_back(quad_row(lt, n));
    } else if (section == 2) {
      translations.push_back(quad_row(lt, n));
    } else {
      throw ParseError("unexpected '" + first + "'", lt.line, lt.toks.front().second);
    }
  }
  if (basis.size() != n)
    throw ParseError("expected " + std::to_string(n) + " basis rows, found " + std::to_string(basis.size()), basis_line, 1);
  try {
    return PeriodicSet(Lattice(std::move(basis), scale), std::move(translations));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), basis_line, 1);
  }
}

PeriodicSet read_packing_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_packing(ss.str());
}

std::string format_packing(const PeriodicSet& set) {
  std::string out = "dim " + std::to_string(set.dim()) + "\n";
  if (set.lattice().scale() != 1.0) out += "scale " + format_shortest(set.lattice().scale()) + "\n";
  out += "basis\n";
  auto row = [](const QVec& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].str();
    return s + "\n";
  };
  for (const auto& b : set.lattice().basis()) out += row(b);
  if (!set.is_lattice()) {
    out += "translations\n";
    for (const auto& t : set.translations()) out += row(t);
  }
  return out;
}

}  // namespace sphcode
