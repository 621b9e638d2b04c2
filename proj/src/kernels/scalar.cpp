#include <limits>

#include "sphcode/kernels.hpp"

namespace sphcode::kernels::scalar {

double max_pair_dot(const PointBlock& block) {
  const std::size_t n = block.count;
  const double* x = block.coords.data();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < block.dim; ++k) acc += x[k * n + i] * x[k * n + j];
      if (acc > best) best = acc;
    }
  }
  return best;
}

void dot_matrix(const PointBlock& block, double* out) {
  const std::size_t n = block.count;
  const double* x = block.coords.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < block.dim; ++k) acc += x[k * n + i] * x[k * n + j];
      out[i * n + j] = acc;
    }
  }
}

}  // namespace sphcode::kernels::scalar
