// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/da_plus/attention.hpp"

#include <ATen/Parallel.h>

#include <sstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/feature_map.hpp"
#include "fmdseg/da_plus/spatial_attention_kernel.hpp"

namespace fmdseg::da_plus {
namespace {

using torch::autograd::AutogradContext;
using torch::autograd::variable_list;

void check_attention_inputs(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v) {
  const bool ok = q.dim() == 3 && k.dim() == 3 && v.dim() == 3 && q.sizes() == k.sizes() &&
                  v.size(0) == q.size(0) && v.size(2) == q.size(2) && q.dtype() == k.dtype() &&
                  q.dtype() == v.dtype();
  if (!ok) {
    std::ostringstream msg;
    msg << "spatial_attention: incompatible query " << q.sizes() << ", key " << k.sizes() << ", value "
        << v.sizes();
    throw ShapeError(msg.str());
  }
}

class SpatialAttentionFunction : public torch::autograd::Function<SpatialAttentionFunction> {
 public:
  static torch::Tensor forward(AutogradContext* ctx, torch::Tensor query, torch::Tensor key,
                               torch::Tensor value) {
    query = query.contiguous();
    key = key.contiguous();
    value = value.contiguous();
    const auto batch = query.size(0);
    const auto dk = query.size(1);
    const auto n = query.size(2);
    const auto dv = value.size(1);
    auto out = torch::empty({batch, dv, n}, value.options());
    auto lse = torch::empty({batch, n}, value.options());
    AT_DISPATCH_FLOATING_TYPES(query.scalar_type(), "spatial_attention_forward", [&] {
      const auto* q = query.data_ptr<scalar_t>();
      const auto* k = key.data_ptr<scalar_t>();
      const auto* v = value.data_ptr<scalar_t>();
      auto* o = out.data_ptr<scalar_t>();
      auto* l = lse.data_ptr<scalar_t>();
      at::parallel_for(0, batch, 1, [&](std::int64_t begin, std::int64_t end) {
        for (auto b = begin; b < end; ++b) {
          kernel::spatial_attention_forward(q + b * dk * n, k + b * dk * n, v + b * dv * n, o + b * dv * n,
                                            l + b * n, n, dk, dv);
        }
      });
    });
    ctx->save_for_backward({query, key, value, out, lse});
    return out;
  }

  static variable_list backward(AutogradContext* ctx, variable_list grads) {
    const auto saved = ctx->get_saved_variables();
    const auto& query = saved[0];
    const auto& key = saved[1];
    const auto& value = saved[2];
    const auto& out = saved[3];
    const auto& lse = saved[4];
    const auto grad_out = grads[0].contiguous();
    const auto batch = query.size(0);
    const auto dk = query.size(1);
    const auto n = query.size(2);
    const auto dv = value.size(1);
    auto grad_q = torch::empty_like(query);
    auto grad_k = torch::empty_like(key);
    auto grad_v = torch::empty_like(value);
    AT_DISPATCH_FLOATING_TYPES(query.scalar_type(), "spatial_attention_backward", [&] {
      const auto* q = query.data_ptr<scalar_t>();
      const auto* k = key.data_ptr<scalar_t>();
      const auto* v = value.data_ptr<scalar_t>();
      const auto* o = out.data_ptr<scalar_t>();
      const auto* l = lse.data_ptr<scalar_t>();
      const auto* go = grad_out.data_ptr<scalar_t>();
      auto* gq = grad_q.data_ptr<scalar_t>();
      auto* gk = grad_k.data_ptr<scalar_t>();
      auto* gv = grad_v.data_ptr<scalar_t>();
      at::parallel_for(0, batch, 1, [&](std::int64_t begin, std::int64_t end) {
        for (auto b = begin; b < end; ++b) {
          kernel::spatial_attention_backward(q + b * dk * n, k + b * dk * n, v + b * dv * n, o + b * dv * n,
                                             l + b * n, go + b * dv * n, gq + b * dk * n, gk + b * dk * n,
                                             gv + b * dv * n, n, dk, dv);
        }
      });
    });
    return {grad_q, grad_k, grad_v};
  }
};

}  // namespace

torch::Tensor spatial_attention(const torch::Tensor& query, const torch::Tensor& key,
                                const torch::Tensor& value) {
  check_attention_inputs(query, key, value);
  return SpatialAttentionFunction::apply(query, key, value);
}

torch::Tensor spatial_attention_reference(const torch::Tensor& query, const torch::Tensor& key,
                                          const torch::Tensor& value) {
  check_attention_inputs(query, key, value);
  const auto attention = torch::softmax(torch::bmm(query.transpose(1, 2), key), -1);
  return torch::bmm(value, attention.transpose(1, 2));
}

PositionAttentionImpl::PositionAttentionImpl(std::int64_t channels)
    : channels_(channels), key_channels_(std::max<std::int64_t>(1, channels / 8)) {
  query = register_module("query", nn::Conv2d(nn::ConvOptions(channels, key_channels_, 1)));
  key = register_module("key", nn::Conv2d(nn::ConvOptions(channels, key_channels_, 1)));
  value = register_module("value", nn::Conv2d(nn::ConvOptions(channels, channels, 1)));
  alpha = register_parameter("alpha", torch::zeros({1}));
}

void PositionAttentionImpl::reset_parameters(at::Generator&) { alpha.zero_(); }

torch::Tensor PositionAttentionImpl::attention_map(const torch::Tensor& x) {
  require_channels(x, channels_, "PAM");
  const auto b = x.size(0);
  const auto n = x.size(2) * x.size(3);
  const auto q = query->forward(x).view({b, key_channels_, n});
  const auto k = key->forward(x).view({b, key_channels_, n});
  return torch::softmax(torch::bmm(q.transpose(1, 2), k), -1);
}

torch::Tensor PositionAttentionImpl::forward(const torch::Tensor& x) {
  require_channels(x, channels_, "PAM");
  const auto b = x.size(0);
  const auto n = x.size(2) * x.size(3);
  const auto q = query->forward(x).reshape({b, key_channels_, n});
  const auto k = key->forward(x).reshape({b, key_channels_, n});
  const auto v = value->forward(x).reshape({b, channels_, n});
  const auto attended = spatial_attention(q, k, v).view(x.sizes());
  return x + alpha * attended;
}

ChannelAttentionImpl::ChannelAttentionImpl() { beta = register_parameter("beta", torch::zeros({1})); }

void ChannelAttentionImpl::reset_parameters(at::Generator&) { beta.zero_(); }

torch::Tensor ChannelAttentionImpl::attention_map(const torch::Tensor& x) {
  require_feature_map(x, "CAM");
  const auto flat = x.reshape({x.size(0), x.size(1), -1});
  return torch::softmax(torch::bmm(flat, flat.transpose(1, 2)), -1);
}

torch::Tensor ChannelAttentionImpl::forward(const torch::Tensor& x) {
  require_feature_map(x, "CAM");
  const auto flat = x.reshape({x.size(0), x.size(1), -1});
  const auto gram_attention = torch::softmax(torch::bmm(flat, flat.transpose(1, 2)), -1);
  return x + beta * torch::bmm(gram_attention, flat).view(x.sizes());
}

}  // namespace fmdseg::da_plus
