// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

// Memory-efficient softmax attention over spatial positions for one sample.
// The (N x N) attention matrix is never stored: the forward keeps only the
// per-query log-sum-exp and the backward recomputes each row.
//
// Layouts are channel-major, matching a flattened (C, H*W) feature map:
//   query, key: (dk, n)   value, out, grad_out: (dv, n)   lse: (n)
//   out[c, i] = sum_j softmax_j(sum_d query[d, i] * key[d, j]) * value[c, j]
namespace fmdseg::da_plus::kernel {

template <typename T>
void spatial_attention_forward(const T* query, const T* key, const T* value, T* out, T* lse,
                               std::int64_t n, std::int64_t dk, std::int64_t dv);

// grad_query is overwritten; grad_key and grad_value are overwritten as well.
template <typename T>
void spatial_attention_backward(const T* query, const T* key, const T* value, const T* out,
                                const T* lse, const T* grad_out, T* grad_query, T* grad_key,
                                T* grad_value, std::int64_t n, std::int64_t dk, std::int64_t dv);

}  // namespace fmdseg::da_plus::kernel
