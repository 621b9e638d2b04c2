#include <limits>

#include "sphcode/kernels.hpp"

#if defined(SPHCODE_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace sphcode::kernels::avx2 {

#if defined(SPHCODE_HAVE_AVX2)

bool compiled() noexcept { return true; }

namespace {

// acc[j..j+3] = sum_k x[k][i] * x[k][j..j+3], same summation order as the scalar loop.
inline __m256d dot4(const double* x, std::size_t n, std::size_t dim, std::size_t i, std::size_t j) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t k = 0; k < dim; ++k) {
    const __m256d xi = _mm256_broadcast_sd(x + k * n + i);
    const __m256d xj = _mm256_loadu_pd(x + k * n + j);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xi, xj));
  }
  return acc;
}

inline double dot1(const double* x, std::size_t n, std::size_t dim, std::size_t i, std::size_t j) {
  double acc = 0.0;
  for (std::size_t k = 0; k < dim; ++k) acc += x[k * n + i] * x[k * n + j];
  return acc;
}

}  // namespace

double max_pair_dot(const PointBlock& block) {
  const std::size_t n = block.count;
  const double* x = block.coords.data();
  double best = -std::numeric_limits<double>::infinity();
  __m256d vbest = _mm256_set1_pd(best);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) vbest = _mm256_max_pd(vbest, dot4(x, n, block.dim, i, j));
    for (; j < n; ++j) {
      const double d = dot1(x, n, block.dim, i, j);
      if (d > best) best = d;
    }
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vbest);
  for (double v : lanes)
    if (v > best) best = v;
  return best;
}

void dot_matrix(const PointBlock& block, double* out) {
  const std::size_t n = block.count;
  const double* x = block.coords.data();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) _mm256_storeu_pd(out + i * n + j, dot4(x, n, block.dim, i, j));
    for (; j < n; ++j) out[i * n + j] = dot1(x, n, block.dim, i, j);
  }
}

#else

bool compiled() noexcept { return false; }
double max_pair_dot(const PointBlock& block) { return scalar::max_pair_dot(block); }
void dot_matrix(const PointBlock& block, double* out) { scalar::dot_matrix(block, out); }

#endif

}  // namespace sphcode::kernels::avx2
