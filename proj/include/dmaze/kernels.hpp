#pragma once
// Dense arithmetic kernels used by the network core.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once per process from CPUID; the
// environment variable DREAMING_MAZE_ISA=scalar forces the reference path.
// Results of the two paths agree to rounding (see tests/test_kernels.cpp);
// within one path every kernel is deterministic.

#include <cstddef>
#include <string_view>

namespace dmaze::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

template <typename T>
struct AdamCoeffs {
  T lr;
  T beta1;
  T beta2;
  T epsilon;
  T bias_correction1;  // 1 - beta1^t
  T bias_correction2;  // 1 - beta2^t
};

template <typename T>
struct KernelTable {
  Isa isa;
  // y[i] += a * x[i]
  void (*axpy)(T a, const T* x, T* y, std::size_t n);
  // sum_i x[i] * y[i]
  T (*dot)(const T* x, const T* y, std::size_t n);
  // y[i] *= a
  void (*scale)(T a, T* y, std::size_t n);
  // one bias-corrected Adam update over n parameters
  void (*adam)(T* param, const T* grad, T* m, T* v, std::size_t n,
               const AdamCoeffs<T>& c);
};

template <typename T>
const KernelTable<T>& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks AVX2+FMA.
template <typename T>
const KernelTable<T>* avx2_kernels();

// The process-wide selection.
template <typename T>
const KernelTable<T>& active();

Isa active_isa();

bool cpu_supports_avx2();

namespace detail {
template <typename T>
const KernelTable<T>* avx2_table_if_built();
}  // namespace detail

}  // namespace dmaze::kernels
