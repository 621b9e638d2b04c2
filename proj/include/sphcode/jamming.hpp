#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sphcode/sphere_geom.hpp"

namespace sphcode {

inline constexpr double kContactTol = 1e-9;

struct ContactGraph {
  std::size_t size = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<bool> rattler;
  double phi = 0.0;
  double tol = 0.0;
  bool exact = false;

  bool has_rattler() const;
};

/// Pairs at the minimal angle (exact equality when all coordinates are exact).
ContactGraph contact_graph(const SphericalCode& code, double tol = kContactTol);

using Motion = std::vector<std::vector<double>>;  // one tangent vector per point

/// Basis of {x_i -> A x_i : A skew}, from the n(n-1)/2 elementary generators.
std::vector<Motion> rotation_space(const SphericalCode& code);

enum class JamStatus { InfinitesimallyJammed, Unjammed };
std::string_view status_name(JamStatus s);

struct JamVerdict {
  JamStatus status = JamStatus::InfinitesimallyJammed;
  std::optional<Motion> witness;
  std::size_t rotation_space_dim = 0;
  std::size_t contacts = 0;
  std::vector<std::size_t> rattlers;
  bool exact = false;
  /// "lp", "flex", "rattler" or "certificate"
  std::string reason;
  double lp_optimum = 0.0;
  /// largest first-order contact slack of the witness
  double margin = 0.0;
};

/// Infinitesimal jamming: does the first-order cone of motions that keep every
/// contact from shrinking reduce to the rotations? Antipodal contacts require
/// v_i + v_j = 0.
JamVerdict jam_test(const SphericalCode& code, double tol = kContactTol);

/// Moves each point by step along `motion` and projects back to the sphere.
SphericalCode apply_motion(const SphericalCode& code, const Motion& motion, double step);

/// Random tangent perturbations of size step; true when one raises min_angle by more than step^2.
bool perturbation_probe(const SphericalCode& code, std::size_t trials, double step, std::uint64_t seed);

std::string verdict_json(const JamVerdict& v);

}  // namespace sphcode
