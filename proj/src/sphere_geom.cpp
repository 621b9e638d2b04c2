#include "sphcode/sphere_geom.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "sphcode/error.hpp"
#include "sphcode/format.hpp"

namespace sphcode {

namespace {

// cos(15 k degrees) for k in [0, 24), when quadratic.
std::optional<Quad> cos_15deg(long k) {
  k = ((k % 24) + 24) % 24;
  if (k > 12) k = 24 - k;
  bool negate = false;
  if (k > 6) {
    k = 12 - k;
    negate = true;
  }
  std::optional<Quad> v;
  switch (k) {
    case 0: v = Quad(1); break;
    case 2: v = Quad(0, Rational(1, 2), 3); break;
    case 3: v = Quad(0, Rational(1, 2), 2); break;
    case 4: v = Quad(Rational(1, 2)); break;
    case 6: v = Quad(0); break;
    default: return std::nullopt;
  }
  return negate ? -*v : *v;
}

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

double adaptive_simpson(const auto& f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Area of S^(n-1) for n >= 1 (S^0 is two points).
double sphere_area_any(int n) {
  return n * std::pow(kPi, n / 2.0) / std::tgamma(1.0 + n / 2.0);
}

bool is_decimal_token(std::string_view tok) {
  return tok.find_first_of(".eE") != std::string_view::npos && tok.find("sqrt") == std::string_view::npos;
}

}  // namespace

std::optional<Quad> exact_cos_pi(const Rational& a) {
  Rational twelve = a * 12;
  twelve.canonicalize();
  if (twelve.get_den() != 1) return std::nullopt;
  mpz_class k = twelve.get_num() % 24;
  if (k < 0) k += 24;
  return cos_15deg(k.get_si());
}

std::optional<Quad> exact_sin_pi(const Rational& a) {
  return exact_cos_pi(Rational(1, 2) - a);
}

SpherePoint SpherePoint::from_coords(std::vector<double> coords) {
  if (coords.size() < 2) throw DomainError("sphere points need dimension >= 2");
  double norm2 = 0.0;
  for (double c : coords) norm2 += c * c;
  if (std::abs(std::sqrt(norm2) - 1.0) > kUnitNormTol) throw DomainError("point is not on the unit sphere");
  SpherePoint p;
  p.x_ = std::move(coords);
  p.form_ = Form::Decimal;
  return p;
}

SpherePoint SpherePoint::from_exact(std::vector<Quad> coords) {
  if (coords.size() < 2) throw DomainError("sphere points need dimension >= 2");
  Quad norm2;
  for (const auto& c : coords) norm2 += c * c;
  if (norm2 != Quad(1)) throw DomainError("point is not on the unit sphere (exact norm " + norm2.str() + ")");
  SpherePoint p;
  p.x_.reserve(coords.size());
  for (const auto& c : coords) p.x_.push_back(c.to_double());
  p.exact_ = std::move(coords);
  p.form_ = Form::Exact;
  return p;
}

SpherePoint SpherePoint::from_angles(std::vector<Rational> angles) {
  if (angles.empty()) throw DomainError("sphere points need dimension >= 2");
  const std::size_t n = angles.size() + 1;
  SpherePoint p;
  p.form_ = Form::Angular;
  for (auto& a : angles) a.canonicalize();
  p.angles_ = angles;

  std::optional<std::vector<Quad>> exact;
  try {
    std::vector<Quad> x(n);
    Quad prefix(1);
    bool ok = true;
    for (std::size_t i = 0; i + 1 < n && ok; ++i) {
      auto c = exact_cos_pi(angles[i]);
      auto s = exact_sin_pi(angles[i]);
      if (!c || !s) {
        ok = false;
        break;
      }
      x[i] = prefix * *c;
      prefix *= *s;
    }
    if (ok) {
      x[n - 1] = prefix;
      exact = std::move(x);
    }
  } catch (const DomainError&) {
    exact.reset();
  }

  if (exact) {
    for (const auto& c : *exact) p.x_.push_back(c.to_double());
    p.exact_ = std::move(exact);
  } else {
    p.x_.assign(n, 0.0);
    double prefix = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double t = kPi * angles[i].get_d();
      p.x_[i] = prefix * std::cos(t);
      prefix *= std::sin(t);
    }
    p.x_[n - 1] = prefix;
  }
  return p;
}

std::string SpherePoint::canonical() const {
  std::string out;
  switch (form_) {
    case Form::Angular:
      out = "@";
      for (const auto& a : angles_) out += " " + to_string(a);
      break;
    case Form::Exact:
      for (std::size_t i = 0; i < exact_->size(); ++i) out += (i ? " " : "") + (*exact_)[i].str();
      break;
    case Form::Decimal:
      for (std::size_t i = 0; i < x_.size(); ++i) out += (i ? " " : "") + format_shortest(x_[i]);
      break;
  }
  return out;
}

SphericalCode::SphericalCode(std::size_t dim, std::vector<SpherePoint> points)
    : dim_(dim), points_(std::move(points)) {
  if (dim_ < 2) throw DomainError("codes need dimension >= 2");
  if (points_.empty()) throw DomainError("codes need at least one point");
  for (const auto& p : points_)
    if (p.dim() != dim_) throw DomainError("point dimension does not match code dimension");
  std::vector<const std::vector<double>*> sorted;
  sorted.reserve(points_.size());
  for (const auto& p : points_) sorted.push_back(&p.coords());
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return *a < *b; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (*sorted[i] == *sorted[i - 1]) throw DomainError("code points must be pairwise distinct");
}

PointBlock SphericalCode::block() const {
  PointBlock b;
  b.dim = dim_;
  b.count = points_.size();
  b.coords.resize(b.dim * b.count);
  for (std::size_t i = 0; i < b.count; ++i)
    for (std::size_t k = 0; k < b.dim; ++k) b.coords[k * b.count + i] = points_[i][k];
  return b;
}

std::optional<std::vector<std::vector<Quad>>> SphericalCode::exact_coords() const {
  std::vector<std::vector<Quad>> out;
  long field = 1;
  for (const auto& p : points_) {
    if (!p.exact()) return std::nullopt;
    for (const auto& c : *p.exact()) {
      if (c.is_rational()) continue;
      if (field == 1) field = c.radicand();
      if (c.radicand() != field) return std::nullopt;
    }
    out.push_back(*p.exact());
  }
  return out;
}

double angular_distance(const SpherePoint& x, const SpherePoint& y) {
  if (x.dim() != y.dim()) throw DomainError("dimension mismatch");
  double dot = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) dot += x[k] * y[k];
  return std::acos(clamp_unit(dot));
}

double min_angle(const SphericalCode& code) {
  if (code.size() < 2) throw DomainError("minimal angle undefined");
  return std::acos(clamp_unit(kernels::max_pair_dot(code.block())));
}

double rate(const SphericalCode& code) {
  return std::log2(static_cast<double>(code.size())) / static_cast<double>(code.dim());
}

double sphere_area(int n) {
  if (n < 2) throw DomainError("sphere_area needs n >= 2");
  return sphere_area_any(n);
}

double cap_area(int n, double phi) {
  if (n < 2) throw DomainError("cap_area needs n >= 2");
  if (!(phi >= 0.0 && phi <= kPi)) throw DomainError("cap angle must lie in [0, pi]");
  if (phi == 0.0) return 0.0;
  const int power = n - 2;
  auto f = [power](double x) { return power == 0 ? 1.0 : std::pow(std::sin(x), power); };
  const double b = phi / 2.0;
  const double fa = f(0.0), fm = f(b / 2.0), fb = f(b);
  const double whole = b / 6.0 * (fa + 4.0 * fm + fb);
  const double integral = adaptive_simpson(f, 0.0, b, fa, fm, fb, whole, 1e-12, 50);
  return sphere_area_any(n - 1) * integral;
}

double code_density(const SphericalCode& code) {
  const int n = static_cast<int>(code.dim());
  return static_cast<double>(code.size()) * cap_area(n, min_angle(code)) / sphere_area(n);
}

std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n) {
  // Shortest augmenting path with potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

struct Matched {
  double value;
  std::vector<std::size_t> matching;
};

Matched match_points(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y) {
  const std::size_t n = x.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < x[i].size(); ++k) dot += x[i][k] * y[j][k];
      cost[i * n + j] = std::acos(clamp_unit(dot)) / kPi;
    }
  Matched m{0.0, hungarian(cost, n)};
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += cost[i * n + m.matching[i]];
  m.value = sum / static_cast<double>(n);
  return m;
}

std::vector<std::vector<double>> coords_of(const SphericalCode& c) {
  std::vector<std::vector<double>> out;
  out.reserve(c.size());
  for (const auto& p : c.points()) out.push_back(p.coords());
  return out;
}

// Rotates x onto y (Kabsch, proper rotations only) given a pairing.
std::vector<std::vector<double>> procrustes(const std::vector<std::vector<double>>& x,
                                            const std::vector<std::vector<double>>& y,
                                            const std::vector<std::size_t>& matching) {
  const auto n = static_cast<Eigen::Index>(x.front().size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) h(a, b) += y[matching[i]][a] * x[i][b];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(n - 1, n - 1) = -1.0;
  const Eigen::MatrixXd r = svd.matrixU() * d * svd.matrixV().transpose();
  std::vector<std::vector<double>> out;
  out.reserve(x.size());
  for (const auto& p : x) {
    Eigen::VectorXd v = r * Eigen::Map<const Eigen::VectorXd>(p.data(), n);
    v.normalize();
    out.emplace_back(v.data(), v.data() + n);
  }
  return out;
}

}  // namespace

ConfigDistanceReport config_distance(const SphericalCode& x, const SphericalCode& y, bool align) {
  ConfigDistanceReport report;
  if (x.dim() != y.dim() || x.size() != y.size()) return report;

  // Evaluate on a canonical ordering of the pair so the result is exactly symmetric.
  const bool swap = serialize(y) < serialize(x);
  const auto a = coords_of(swap ? y : x);
  const auto b = coords_of(swap ? x : y);

  Matched best = match_points(a, b);
  if (align && a.size() >= 2) {
    report.aligned = true;
    Matched rotated = match_points(procrustes(a, b, best.matching), b);
    if (rotated.value < best.value) best = std::move(rotated);
  }

  report.value = std::clamp(best.value, 0.0, 1.0);
  if (swap) {
    report.matching.assign(best.matching.size(), 0);
    for (std::size_t i = 0; i < best.matching.size(); ++i) report.matching[best.matching[i]] = i;
  } else {
    report.matching = std::move(best.matching);
  }
  return report;
}

std::string serialize(const SphericalCode& code) {
  std::vector<std::string> lines;
  lines.reserve(code.size());
  for (const auto& p : code.points()) lines.push_back(p.canonical());
  std::sort(lines.begin(), lines.end());
  std::string out = "dim " + std::to_string(code.dim()) + "\npoints " + std::to_string(code.size()) + "\n";
  for (const auto& l : lines) out += l + "\n";
  return out;
}

namespace {

struct Token {
  std::string text;
  int column;
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

std::size_t parse_header(const std::vector<Token>& toks, const char* key, int line_no) {
  if (toks.size() != 2 || toks[0].text != key)
    throw ParseError(std::string("expected '") + key + " <count>'", line_no, toks.empty() ? 1 : toks[0].column);
  try {
    std::size_t pos = 0;
    long v = std::stol(toks[1].text, &pos);
    if (pos != toks[1].text.size() || v < 0) throw std::invalid_argument("bad");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + key + " value", line_no, toks[1].column);
  }
}

SpherePoint parse_point(const std::vector<Token>& toks, std::size_t dim, int line_no) {
  auto rethrow = [line_no](const Token& t, const std::exception& e) -> ParseError {
    return ParseError(std::string("bad coordinate '") + t.text + "': " + e.what(), line_no, t.column);
  };
  if (toks.front().text == "@") {
    if (toks.size() != dim) throw ParseError("expected " + std::to_string(dim - 1) + " angles", line_no, toks.front().column);
    std::vector<Rational> angles;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      try {
        angles.push_back(parse_rational(toks[i].text));
      } catch (const Error& e) {
        throw rethrow(toks[i], e);
      }
    }
    return SpherePoint::from_angles(std::move(angles));
  }
  if (toks.size() != dim) throw ParseError("expected " + std::to_string(dim) + " coordinates", line_no, toks.front().column);
  bool decimal = false;
  for (const auto& t : toks) decimal = decimal || is_decimal_token(t.text);
  if (decimal) {
    std::vector<double> x;
    for (const auto& t : toks) {
      auto v = parse_double(t.text);
      if (!v) throw ParseError("bad coordinate '" + t.text + "'", line_no, t.column);
      x.push_back(*v);
    }
    try {
      return SpherePoint::from_coords(std::move(x));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no, toks.front().column);
    }
  }
  std::vector<Quad> x;
  for (const auto& t : toks) {
    try {
      x.push_back(Quad::parse(t.text));
    } catch (const Error& e) {
      throw rethrow(t, e);
    }
  }
  try {
    return SpherePoint::from_exact(std::move(x));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), line_no, toks.front().column);
  }
}

}  // namespace

SphericalCode parse_code(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::size_t dim = 0, count = 0;
  int stage = 0;
  std::vector<SpherePoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (stage == 0) {
      dim = parse_header(toks, "dim", line_no);
      if (dim < 2) throw ParseError("dim must be >= 2", line_no, toks[1].column);
      stage = 1;
    } else if (stage == 1) {
      count = parse_header(toks, "points", line_no);
      stage = 2;
    } else {
      if (points.size() == count) throw ParseError("more points than declared", line_no, 1);
      points.push_back(parse_point(toks, dim, line_no));
    }
  }
  if (stage < 2) throw ParseError("missing header", line_no + 1, 1);
  if (points.size() != count)
    throw ParseError("declared " + std::to_string(count) + " points, found " + std::to_string(points.size()), line_no + 1, 1);
  try {
    return SphericalCode(dim, std::move(points));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), line_no, 1);
  }
}

SphericalCode read_code_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_code(ss.str());
}

}  // namespace sphcode
