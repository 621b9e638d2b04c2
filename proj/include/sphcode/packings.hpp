#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sphcode/exact.hpp"
#include "sphcode/field.hpp"

namespace sphcode {

using QVec = std::vector<Quad>;

inline constexpr std::size_t kMaxEnumerationDim = 8;

/// Lattice with an exact basis (one basis vector per entry) times a
/// floating scale factor. The scale only matters for absolute lengths;
/// densities are computed from the exact part.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(std::vector<QVec> basis, double scale = 1.0);

  static Lattice integer(std::size_t n);

  std::size_t dim() const noexcept { return basis_.size(); }
  const std::vector<QVec>& basis() const noexcept { return basis_; }
  double scale() const noexcept { return scale_; }
  Lattice scaled(double factor) const;

  /// B with B(i, j) = coordinate i of basis vector j.
  Matrix<Quad> matrix() const;
  Matrix<Quad> gram() const;
  /// |det B| of the exact part.
  Quad covolume_exact() const;
  double covolume() const;
  std::vector<double> point(const std::vector<long>& coeffs) const;

 private:
  std::vector<QVec> basis_;
  double scale_ = 1.0;
};

/// Union of translates v_i + L, reduced to the fundamental domain and deduplicated.
class PeriodicSet {
 public:
  PeriodicSet() = default;
  PeriodicSet(Lattice lattice, std::vector<QVec> translations);
  explicit PeriodicSet(Lattice lattice);

  const Lattice& lattice() const noexcept { return lattice_; }
  const std::vector<QVec>& translations() const noexcept { return translations_; }
  std::size_t size() const noexcept { return translations_.size(); }
  std::size_t dim() const noexcept { return lattice_.dim(); }
  bool is_lattice() const noexcept { return translations_.size() == 1; }
  PeriodicSet scaled(double factor) const;
  std::vector<double> translation(std::size_t i) const;

 private:
  Lattice lattice_;
  std::vector<QVec> translations_;
};

struct ShortestVectors {
  Quad norm_sq;                             // exact, before scaling
  std::vector<std::vector<long>> minimal;   // coefficient vectors (lattice case)
  double length = 0.0;                      // scaled
};

/// Exact minimum over nonzero lattice vectors via Fincke-Pohst enumeration
/// (candidates compared with exact norms). Lists every minimal vector.
ShortestVectors shortest_vectors(const Lattice& lattice);
double shortest_vector_length(const Lattice& lattice);
/// Exact squared minimal distance of a periodic set (unscaled) and its scaled length.
std::pair<Quad, double> periodic_min_distance_sq(const PeriodicSet& set);
double periodic_min_distance(const PeriodicSet& set);

/// ceil(l_ub * ||B^-1||_inf * sqrt(n)) with l_ub the shortest basis vector.
long coefficient_box_bound(const Lattice& lattice);

/// pi^(n/2) / Gamma(1 + n/2).
double unit_ball_volume(std::size_t n);

struct DensityReport {
  std::size_t dim = 0;
  std::size_t size = 1;
  double min_distance = 0.0;
  double covolume = 0.0;
  double center_density = 0.0;
  double density = 0.0;
  std::optional<Quad> center_density_exact;
  Quad min_distance_sq_exact;
  Quad covolume_exact;
};

DensityReport lattice_center_density(const Lattice& lattice);
DensityReport periodic_center_density(const PeriodicSet& set);
double packing_density(const PeriodicSet& set);

/// Scales by 2d/l so the packing radius becomes d.
PeriodicSet rescale_to_radius(const PeriodicSet& set, double d);
Lattice rescale_to_radius(const Lattice& lattice, double d);

/// Text format: "dim n", "basis", n rows, optional "translations" and rows.
PeriodicSet parse_packing(std::string_view text);
PeriodicSet read_packing_file(const std::string& path);
std::string format_packing(const PeriodicSet& set);

}  // namespace sphcode
