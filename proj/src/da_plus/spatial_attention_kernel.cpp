// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/da_plus/spatial_attention_kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace fmdseg::da_plus::kernel {
namespace {

// exp(x) for x <= 0 with ~1 ulp polynomial accuracy; branch-free so the
// row loops vectorize.
inline float exp_nonpositive(float x) {
  x = x < -87.0f ? -87.0f : x;
  // Round-to-nearest through the 1.5 * 2^23 shifter; the integer lands in the
  // low mantissa bits of t. Float-to-int casts and std::max block vectorization.
  constexpr float shifter = 12582912.0f;
  const float t = x * 1.44269504088896341f + shifter;
  const float n = t - shifter;
  float r = x - n * 0.693359375f;
  r = r + n * 2.12194440e-4f;
  float p = 1.9875691500e-4f;
  p = p * r + 1.3981999507e-3f;
  p = p * r + 8.3334519073e-3f;
  p = p * r + 4.1665795894e-2f;
  p = p * r + 1.6666665459e-1f;
  p = p * r + 5.0000001201e-1f;
  p = p * r * r + r + 1.0f;
  const std::int32_t bits = (std::bit_cast<std::int32_t>(t) - 0x4B400000 + 127) << 23;
  return p * std::bit_cast<float>(bits);
}

inline double exp_nonpositive(double x) { return std::exp(x); }

template <typename T>
void row_scores(const T* query, const T* key, std::int64_t i, std::int64_t n, std::int64_t dk,
                T* scores) {
  const T q0 = query[i];
  const T* k0 = key;
#pragma omp simd
  for (std::int64_t j = 0; j < n; ++j) scores[j] = q0 * k0[j];
  for (std::int64_t d = 1; d < dk; ++d) {
    const T qd = query[d * n + i];
    const T* kd = key + d * n;
#pragma omp simd
    for (std::int64_t j = 0; j < n; ++j) scores[j] += qd * kd[j];
  }
}

template <typename T>
T row_max(const T* s, std::int64_t n) {
  T m = -std::numeric_limits<T>::infinity();
#pragma omp simd reduction(max : m)
  for (std::int64_t j = 0; j < n; ++j) m = s[j] > m ? s[j] : m;
  return m;
}

template <typename T>
T dot(const T* a, const T* b, std::int64_t n) {
  T acc = 0;
#pragma omp simd reduction(+ : acc)
  for (std::int64_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

}  // namespace

template <typename T>
void spatial_attention_forward(const T* query, const T* key, const T* value, T* out, T* lse,
                               std::int64_t n, std::int64_t dk, std::int64_t dv) {
  std::vector<T> row(static_cast<std::size_t>(n));
  T* s = row.data();
  for (std::int64_t i = 0; i < n; ++i) {
    row_scores(query, key, i, n, dk, s);
    const T m = row_max(s, n);
    T sum = 0;
#pragma omp simd reduction(+ : sum)
    for (std::int64_t j = 0; j < n; ++j) {
      s[j] = exp_nonpositive(s[j] - m);
      sum += s[j];
    }
    const T inv = T(1) / sum;
    for (std::int64_t c = 0; c < dv; ++c) out[c * n + i] = dot(s, value + c * n, n) * inv;
    lse[i] = m + std::log(sum);
  }
}

template <typename T>
void spatial_attention_backward(const T* query, const T* key, const T* value, const T* out,
                                const T* lse, const T* grad_out, T* grad_query, T* grad_key,
                                T* grad_value, std::int64_t n, std::int64_t dk, std::int64_t dv) {
  std::fill(grad_key, grad_key + dk * n, T(0));
  std::fill(grad_value, grad_value + dv * n, T(0));
  std::vector<T> prob_row(static_cast<std::size_t>(n));
  std::vector<T> ds_row(static_cast<std::size_t>(n));
  T* p = prob_row.data();
  T* ds = ds_row.data();
  for (std::int64_t i = 0; i < n; ++i) {
    T delta = 0;
    for (std::int64_t c = 0; c < dv; ++c) delta += grad_out[c * n + i] * out[c * n + i];

    row_scores(query, key, i, n, dk, p);
    const T shift = lse[i];
#pragma omp simd
    for (std::int64_t j = 0; j < n; ++j) {
      const T z = p[j] - shift;
      p[j] = exp_nonpositive(z > T(0) ? T(0) : z);
    }

    // ds_j = p_j * (sum_c dO[c,i] v[c,j] - delta); dV[c,j] += p_j dO[c,i]
    {
      const T g0 = grad_out[i];
      const T* v0 = value;
      T* gv0 = grad_value;
#pragma omp simd
      for (std::int64_t j = 0; j < n; ++j) {
        ds[j] = g0 * v0[j];
        gv0[j] += p[j] * g0;
      }
    }
    for (std::int64_t c = 1; c < dv; ++c) {
      const T gc = grad_out[c * n + i];
      const T* vc = value + c * n;
      T* gvc = grad_value + c * n;
#pragma omp simd
      for (std::int64_t j = 0; j < n; ++j) {
        ds[j] += gc * vc[j];
        gvc[j] += p[j] * gc;
      }
    }
#pragma omp simd
    for (std::int64_t j = 0; j < n; ++j) ds[j] = p[j] * (ds[j] - delta);

    for (std::int64_t d = 0; d < dk; ++d) {
      const T* kd = key + d * n;
      T* gkd = grad_key + d * n;
      const T qd = query[d * n + i];
      T acc = 0;
#pragma omp simd reduction(+ : acc)
      for (std::int64_t j = 0; j < n; ++j) {
        acc += ds[j] * kd[j];
        gkd[j] += ds[j] * qd;
      }
      grad_query[d * n + i] = acc;
    }
  }
}

template void spatial_attention_forward<float>(const float*, const float*, const float*, float*, float*,
                                               std::int64_t, std::int64_t, std::int64_t);
template void spatial_attention_forward<double>(const double*, const double*, const double*, double*,
                                                double*, std::int64_t, std::int64_t, std::int64_t);
template void spatial_attention_backward<float>(const float*, const float*, const float*, const float*,
                                                const float*, const float*, float*, float*, float*,
                                                std::int64_t, std::int64_t, std::int64_t);
template void spatial_attention_backward<double>(const double*, const double*, const double*, const double*,
                                                 const double*, const double*, double*, double*, double*,
                                                 std::int64_t, std::int64_t, std::int64_t);

}  // namespace fmdseg::da_plus::kernel
