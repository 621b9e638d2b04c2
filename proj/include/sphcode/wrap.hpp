#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sphcode/packings.hpp"
#include "sphcode/param_space.hpp"
#include "sphcode/sphere_geom.hpp"

namespace sphcode {

/// Rounding slack for checking wrapped min angles against angle_floor().
inline constexpr double kWrapAngleTol = 1e-12;

/// Latitudes -pi/2 = t_0 < ... < t_M = pi/2 and the packing distance d.
struct WrapSchedule {
  double d = 0.0;
  std::vector<double> latitudes;

  static WrapSchedule from_latitudes(double d, std::vector<double> latitudes);

  std::size_t bands() const noexcept { return latitudes.empty() ? 0 : latitudes.size() - 1; }
  double width(std::size_t i) const { return latitudes[i + 1] - latitudes[i]; }
  double max_width() const;
  double min_width() const;
  /// max width + d / min width.
  double merit() const;
};

/// M = ceil(pi / sqrt(d)) bands of equal width pi / M. Requires 0 < d < 0.5.
WrapSchedule make_schedule(double d);

struct WrapOptions {
  bool buffer = true;
  unsigned workers = 1;
  std::string source = "packing";
};

struct WrappedCode {
  SphericalCode code;
  std::vector<std::size_t> band_counts;
  std::size_t discarded = 0;
  std::string source;
  double d = 0.0;
  /// Distortion allowance of the maps: 0 on the circle, (max width)^2 on S^2.
  double allowance = 0.0;

  /// 2 arcsin(d/2) - allowance.
  double angle_floor() const;
};

/// Wraps a packing of R^1 or R^2 (rescaled so its minimal distance is d) onto S^1 or S^2.
WrappedCode wrap_packing(const PeriodicSet& packing, const WrapSchedule& schedule, const WrapOptions& options = {});
CodePoint wrapped_code_point(const PeriodicSet& packing, const WrapSchedule& schedule, const WrapOptions& options = {});

struct ConvergenceRow {
  double d = 0.0;
  std::size_t points = 0;
  double delta_code = 0.0;
  double delta_packing = 0.0;
  double deviation = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double head_deviation = 0.0;
  /// deviation at the last (smallest) d
  double tail_deviation = 0.0;
  /// max deviation over all rows after the first
  double tail_max_deviation = 0.0;
};

/// ds must be strictly decreasing.
ConvergenceReport density_convergence(const PeriodicSet& packing, const std::vector<double>& ds, unsigned workers = 1);
std::string convergence_csv(const ConvergenceReport& report);

}  // namespace sphcode
