#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sphcode/exact.hpp"
#include "sphcode/kernels.hpp"

namespace sphcode {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitNormTol = 1e-12;
inline constexpr double kAngleTol = 1e-9;

/// A point of S^(n-1). Besides the double coordinates it remembers how it was
/// given (decimal, exact quadratic-field entries, or angles in units of pi),
/// which fixes its canonical text form.
class SpherePoint {
 public:
  enum class Form { Decimal, Exact, Angular };

  static SpherePoint from_coords(std::vector<double> coords);
  static SpherePoint from_exact(std::vector<Quad> coords);
  /// Hyperspherical angles a_1..a_{n-1} in units of pi:
  /// x_1 = cos(pi a_1), x_2 = sin(pi a_1) cos(pi a_2), ..., x_n = sin(pi a_1)...sin(pi a_{n-1}).
  static SpherePoint from_angles(std::vector<Rational> angles);

  std::size_t dim() const noexcept { return x_.size(); }
  const std::vector<double>& coords() const noexcept { return x_; }
  double operator[](std::size_t i) const { return x_[i]; }
  Form form() const noexcept { return form_; }
  /// Exact coordinates, when known (given exactly, or angles with exact cos/sin).
  const std::optional<std::vector<Quad>>& exact() const noexcept { return exact_; }
  const std::vector<Rational>& angles() const noexcept { return angles_; }

  /// The point's line in the canonical code serialization.
  std::string canonical() const;

 private:
  std::vector<double> x_;
  std::optional<std::vector<Quad>> exact_;
  std::vector<Rational> angles_;
  Form form_ = Form::Decimal;
};

/// cos(pi a) and sin(pi a) when they lie in a quadratic field (denominators 1, 2, 3, 4, 6).
std::optional<Quad> exact_cos_pi(const Rational& a);
std::optional<Quad> exact_sin_pi(const Rational& a);

class SphericalCode {
 public:
  SphericalCode() = default;
  SphericalCode(std::size_t dim, std::vector<SpherePoint> points);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<SpherePoint>& points() const noexcept { return points_; }
  const SpherePoint& operator[](std::size_t i) const { return points_[i]; }

  PointBlock block() const;
  /// Exact coordinates of every point, provided all are exact and share one field.
  std::optional<std::vector<std::vector<Quad>>> exact_coords() const;

 private:
  std::size_t dim_ = 0;
  std::vector<SpherePoint> points_;
};

double angular_distance(const SpherePoint& x, const SpherePoint& y);
double min_angle(const SphericalCode& code);
double rate(const SphericalCode& code);
/// Area of S^(n-1): n pi^(n/2) / Gamma(1 + n/2). Requires n >= 2.
double sphere_area(int n);
/// Area of a cap of angular radius phi/2 on S^(n-1).
double cap_area(int n, double phi);
double code_density(const SphericalCode& code);

struct ConfigDistanceReport {
  double value = 1.0;
  /// matching[i] is the index in Y paired with X[i]; empty when value is 1 by shape mismatch.
  std::vector<std::size_t> matching;
  bool aligned = false;
};

/// Normalized transport distance between two codes. With align set, also
/// tries one orthogonal Procrustes alignment and keeps the smaller value.
ConfigDistanceReport config_distance(const SphericalCode& x, const SphericalCode& y, bool align = false);

/// Minimum-cost perfect matching of a square cost matrix (row-major); returns row -> column.
std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n);

/// "dim n", "points N", then one point per line, sorted.
std::string serialize(const SphericalCode& code);
SphericalCode parse_code(std::string_view text);
SphericalCode read_code_file(const std::string& path);

}  // namespace sphcode
