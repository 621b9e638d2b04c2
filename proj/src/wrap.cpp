#include "sphcode/wrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sphcode/error.hpp"
#include "sphcode/format.hpp"
#include "sphcode/parallel.hpp"

namespace sphcode {

namespace {

// Points of the (scaled) periodic set inside the box [lo, hi), dims 1 and 2.
std::vector<std::vector<double>> points_in_box(const PeriodicSet& set, const std::vector<double>& lo,
                                               const std::vector<double>& hi) {
  const std::size_t n = set.dim();
  const auto& basis = set.lattice().basis();
  const double s = set.lattice().scale();
  // b[j][i]: coordinate i of basis vector j
  std::vector<std::vector<double>> b(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) b[j][i] = basis[j][i].to_double() * s;
  // coefficients c solve sum_j c_j b_j = v
  auto solve = [&](const std::vector<double>& v) {
    if (n == 1) return std::vector<double>{v[0] / b[0][0]};
    const double det = b[0][0] * b[1][1] - b[1][0] * b[0][1];
    return std::vector<double>{(v[0] * b[1][1] - v[1] * b[1][0]) / det, (b[0][0] * v[1] - b[0][1] * v[0]) / det};
  };
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < set.size(); ++t) {
    const auto shift = set.translation(t);
    std::vector<long> cmin(n, 0), cmax(n, 0);
    bool first = true;
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = ((corner >> i) & 1u ? hi[i] : lo[i]) - shift[i];
      const auto c = solve(v);
      for (std::size_t j = 0; j < n; ++j) {
        const long a = static_cast<long>(std::floor(c[j])) - 1, z = static_cast<long>(std::ceil(c[j])) + 1;
        cmin[j] = first ? a : std::min(cmin[j], a);
        cmax[j] = first ? z : std::max(cmax[j], z);
      }
      first = false;
    }
    std::vector<long> c = cmin;
    while (true) {
      std::vector<double> p = shift;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) p[i] += static_cast<double>(c[j]) * b[j][i];
      bool inside = true;
      for (std::size_t i = 0; i < n; ++i) inside = inside && p[i] >= lo[i] && p[i] < hi[i];
      if (inside) out.push_back(std::move(p));
      std::size_t k = 0;
      while (k < n && c[k] == cmax[k]) {
        c[k] = cmin[k];
        ++k;
      }
      if (k == n) break;
      ++c[k];
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Band {
  std::vector<SpherePoint> points;
  std::size_t discarded = 0;
};

Band wrap_circle(const PeriodicSet& p, double d, bool buffer) {
  // Planar spacing d maps to angle 2 arcsin(d/2), so neighbours sit at chord d.
  const double kappa = 2.0 * std::asin(d / 2.0) / d;
  const double length = 2.0 * kPi / kappa;
  Band band;
  for (const auto& x : points_in_box(p, {0.0}, {length})) {
    if (buffer && x[0] > length - d) {
      ++band.discarded;
      continue;
    }
    const double t = kappa * x[0];
    band.points.push_back(SpherePoint::from_coords({std::cos(t), std::sin(t)}));
  }
  return band;
}

Band wrap_band(const PeriodicSet& p, const WrapSchedule& s, std::size_t i, bool buffer) {
  const double lo = s.latitudes[i], hi = s.latitudes[i + 1];
  const double c = std::cos(std::max(std::abs(lo), std::abs(hi)));
  Band band;
  if (c < 1e-12) return band;
  const double width = 2.0 * kPi * c;
  for (const auto& x : points_in_box(p, {0.0, 0.0}, {width, hi - lo})) {
    if (buffer && ((i > 0 && x[1] < s.d) || x[0] > width - s.d)) {
      ++band.discarded;
      continue;
    }
    const double theta = lo + x[1], psi = x[0] / c;
    band.points.push_back(
        SpherePoint::from_coords({std::cos(theta) * std::cos(psi), std::cos(theta) * std::sin(psi), std::sin(theta)}));
  }
  return band;
}

}  // namespace

WrapSchedule WrapSchedule::from_latitudes(double d, std::vector<double> latitudes) {
  if (!(d > 0.0 && d < 0.5)) throw DomainError("wrap distance must lie in (0, 0.5)");
  if (latitudes.size() < 2) throw DomainError("schedule needs at least one band");
  if (std::abs(latitudes.front() + kPi / 2) > 1e-12 || std::abs(latitudes.back() - kPi / 2) > 1e-12)
    throw DomainError("schedule must run from -pi/2 to pi/2");
  for (std::size_t i = 1; i < latitudes.size(); ++i)
    if (!(latitudes[i] > latitudes[i - 1])) throw DomainError("schedule latitudes must increase strictly");
  latitudes.front() = -kPi / 2;
  latitudes.back() = kPi / 2;
  return WrapSchedule{d, std::move(latitudes)};
}

double WrapSchedule::max_width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < bands(); ++i) w = std::max(w, width(i));
  return w;
}

double WrapSchedule::min_width() const {
  double w = kPi;
  for (std::size_t i = 0; i < bands(); ++i) w = std::min(w, width(i));
  return w;
}

double WrapSchedule::merit() const { return max_width() + d / min_width(); }

WrapSchedule make_schedule(double d) {
  if (!(d > 0.0 && d < 0.5)) throw DomainError("wrap distance must lie in (0, 0.5)");
  const auto m = static_cast<std::size_t>(std::ceil(kPi / std::sqrt(d)));
  std::vector<double> lat(m + 1);
  for (std::size_t i = 0; i <= m; ++i) lat[i] = -kPi / 2 + kPi * static_cast<double>(i) / static_cast<double>(m);
  return WrapSchedule::from_latitudes(d, std::move(lat));
}

double WrappedCode::angle_floor() const { return 2.0 * std::asin(d / 2.0) - allowance; }

WrappedCode wrap_packing(const PeriodicSet& packing, const WrapSchedule& schedule, const WrapOptions& options) {
  const std::size_t n = packing.dim();
  if (n != 1 && n != 2)
    throw DomainError("wrapping supports packings in dimension 1 or 2, got " + std::to_string(n));
  const PeriodicSet p = rescale_to_radius(packing, schedule.d / 2.0);
  WrappedCode out;
  out.d = schedule.d;
  out.source = options.source;
  std::vector<Band> bands;
  if (n == 1) {
    bands.push_back(wrap_circle(p, schedule.d, options.buffer));
  } else {
    out.allowance = schedule.max_width() * schedule.max_width();
    bands.resize(schedule.bands());
    parallel_for(bands.size(), options.workers, [&](std::size_t i) { bands[i] = wrap_band(p, schedule, i, options.buffer); });
  }
  std::vector<SpherePoint> points;
  for (auto& b : bands) {
    out.band_counts.push_back(b.points.size());
    out.discarded += b.discarded;
    for (auto& x : b.points) points.push_back(std::move(x));
  }
  if (points.empty()) throw DomainError("wrapped code is empty");
  out.code = SphericalCode(n + 1, std::move(points));
  return out;
}

CodePoint wrapped_code_point(const PeriodicSet& packing, const WrapSchedule& schedule, const WrapOptions& options) {
  const auto w = wrap_packing(packing, schedule, options);
  return CodePoint{rate(w.code), min_angle(w.code)};
}

ConvergenceReport density_convergence(const PeriodicSet& packing, const std::vector<double>& ds, unsigned workers) {
  if (ds.empty()) throw DomainError("distance sequence is empty");
  for (std::size_t i = 1; i < ds.size(); ++i)
    if (!(ds[i] < ds[i - 1])) throw DomainError("distance sequence must decrease strictly");
  ConvergenceReport report;
  const double target = packing_density(packing);
  for (double d : ds) {
    WrapOptions opt;
    opt.workers = workers;
    const auto w = wrap_packing(packing, make_schedule(d), opt);
    ConvergenceRow row{d, w.code.size(), code_density(w.code), target, 0.0};
    row.deviation = std::abs(row.delta_code - target);
    report.rows.push_back(row);
  }
  report.head_deviation = report.rows.front().deviation;
  report.tail_deviation = report.rows.back().deviation;
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    report.tail_max_deviation = std::max(report.tail_max_deviation, report.rows[i].deviation);
  return report;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "d,delta_code,delta_packing,deviation\n";
  for (const auto& r : report.rows)
    out << format_sig(r.d) << ',' << format_sig(r.delta_code) << ',' << format_sig(r.delta_packing) << ','
        << format_sig(r.deviation) << '\n';
  return out.str();
}

}  // namespace sphcode
