#include <cstdlib>
#include <string>

#include "dmaze/kernels.hpp"

namespace dmaze::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool cpu_supports_avx2() {
#if defined(DMAZE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

template <typename T>
const KernelTable<T>* avx2_kernels() {
#if defined(DMAZE_HAVE_AVX2)
  if (cpu_supports_avx2()) return detail::avx2_table_if_built<T>();
#endif
  return nullptr;
}

template const KernelTable<float>* avx2_kernels<float>();
template const KernelTable<double>* avx2_kernels<double>();

namespace {

bool scalar_forced() {
  const char* env = std::getenv("DREAMING_MAZE_ISA");
  return env != nullptr && std::string(env) == "scalar";
}

}  // namespace

Isa active_isa() {
  static const Isa isa =
      (!scalar_forced() && avx2_kernels<float>() != nullptr) ? Isa::Avx2
                                                             : Isa::Scalar;
  return isa;
}

template <typename T>
const KernelTable<T>& active() {
  static const KernelTable<T>& table =
      active_isa() == Isa::Avx2 ? *avx2_kernels<T>() : scalar_kernels<T>();
  return table;
}

template const KernelTable<float>& active<float>();
template const KernelTable<double>& active<double>();

}  // namespace dmaze::kernels
