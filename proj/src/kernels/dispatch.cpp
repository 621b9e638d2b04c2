#include <atomic>
#include <cstdlib>
#include <string>

#include "sphcode/error.hpp"
#include "sphcode/kernels.hpp"

namespace sphcode::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("SPHCODE_SIMD"); env && std::string(env) == "scalar") return Isa::Scalar;
  return avx2::compiled() && cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !(avx2::compiled() && cpu_has_avx2())) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double max_pair_dot(const PointBlock& block) {
  if (block.count < 2) throw DomainError("minimal angle undefined");
  return active_isa() == Isa::Avx2 ? avx2::max_pair_dot(block) : scalar::max_pair_dot(block);
}

std::vector<double> dot_matrix(const PointBlock& block) {
  std::vector<double> out(block.count * block.count);
  if (active_isa() == Isa::Avx2)
    avx2::dot_matrix(block, out.data());
  else
    scalar::dot_matrix(block, out.data());
  return out;
}

}  // namespace sphcode::kernels
