#include "dmaze/kernels.hpp"

#include <cmath>

namespace dmaze::kernels {
namespace {

template <typename T>
void axpy_scalar(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Eight interleaved partial sums, reduced pairwise. Same association as the
// AVX2 float path so the two agree closely on long vectors.
template <typename T>
T dot_scalar(const T* x, const T* y, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t k = 0; k < 8; ++k) acc[k] += x[i + k] * y[i + k];
  T tail = 0;
  for (; i < n; ++i) tail += x[i] * y[i];
  const T s = ((acc[0] + acc[4]) + (acc[2] + acc[6])) +
              ((acc[1] + acc[5]) + (acc[3] + acc[7]));
  return s + tail;
}

template <typename T>
void scale_scalar(T a, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

template <typename T>
void adam_scalar(T* p, const T* g, T* m, T* v, std::size_t n,
                 const AdamCoeffs<T>& c) {
  const T one_b1 = T(1) - c.beta1;
  const T one_b2 = T(1) - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_b2 * (g[i] * g[i]);
    const T mhat = m[i] / c.bias_correction1;
    const T vhat = v[i] / c.bias_correction2;
    p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

}  // namespace

template <>
const KernelTable<float>& scalar_kernels<float>() {
  static const KernelTable<float> table{Isa::Scalar, axpy_scalar<float>,
                                        dot_scalar<float>, scale_scalar<float>,
                                        adam_scalar<float>};
  return table;
}

template <>
const KernelTable<double>& scalar_kernels<double>() {
  static const KernelTable<double> table{
      Isa::Scalar, axpy_scalar<double>, dot_scalar<double>,
      scale_scalar<double>, adam_scalar<double>};
  return table;
}

}  // namespace dmaze::kernels
