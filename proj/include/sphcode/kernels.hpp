#pragma once

// Pairwise inner-product kernels over a structure-of-arrays point block.
// Each kernel has a scalar reference and an AVX2 variant; the dispatcher
// picks one at runtime. Both accumulate over coordinates in the same order
// without fused multiply-add, so the variants agree bit for bit.

#include <cstddef>
#include <string_view>
#include <vector>

namespace sphcode {

/// Points stored coordinate-major: coords[k * count + i] is coordinate k of point i.
struct PointBlock {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> coords;

  double at(std::size_t i, std::size_t k) const { return coords[k * count + i]; }
};

enum class Isa { Scalar, Avx2 };

namespace kernels {

namespace scalar {
double max_pair_dot(const PointBlock& block);
void dot_matrix(const PointBlock& block, double* out);
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
double max_pair_dot(const PointBlock& block);
void dot_matrix(const PointBlock& block, double* out);
}  // namespace avx2

/// Best ISA supported by this CPU and build, unless SPHCODE_SIMD=scalar.
Isa active_isa();
/// Forces a variant. Asking for AVX2 on a CPU without it falls back to scalar.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

/// max over i < j of <x_i, x_j>; needs count >= 2.
double max_pair_dot(const PointBlock& block);
/// Full count x count Gram matrix, row-major.
std::vector<double> dot_matrix(const PointBlock& block);

}  // namespace kernels
}  // namespace sphcode
