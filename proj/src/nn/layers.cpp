// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/nn/layers.hpp"

#include <cmath>
#include <sstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/feature_map.hpp"

namespace fmdseg::nn {
namespace {

void init_weight(torch::Tensor& w, Init init, double fan_in, double fan_out, at::Generator& gen) {
  switch (init) {
    case Init::uniform_fan_in: {
      const double bound = 1.0 / std::sqrt(fan_in);
      w.uniform_(-bound, bound, gen);
      break;
    }
    case Init::kaiming_normal:
      w.normal_(0.0, std::sqrt(2.0 / fan_out), gen);
      break;
    case Init::xavier_uniform: {
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      w.uniform_(-bound, bound, gen);
      break;
    }
    case Init::zeros:
      w.zero_();
      break;
  }
}

void init_bias(torch::Tensor& b, Init init, double fan_in, at::Generator& gen) {
  if (!b.defined()) return;
  if (init == Init::uniform_fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    b.uniform_(-bound, bound, gen);
  } else {
    b.zero_();
  }
}

}  // namespace

Conv2dImpl::Conv2dImpl(ConvOptions options) : options_(std::move(options)) {
  const auto& o = options_;
  if (o.in_channels() % o.groups() != 0 || o.out_channels() % o.groups() != 0) {
    throw ShapeError("Conv2d: channels must be divisible by groups");
  }
  padding_ = o.padding() >= 0 ? o.padding() : o.kernel_size() / 2;
  weight = register_parameter(
      "weight", torch::empty({o.out_channels(), o.in_channels() / o.groups(), o.kernel_size(), o.kernel_size()}));
  if (o.bias()) bias = register_parameter("bias", torch::zeros({o.out_channels()}));
  torch::NoGradGuard no_grad;
  // Deterministic placeholder until seed_parameters() runs.
  weight.zero_();
}

void Conv2dImpl::reset_parameters(at::Generator& gen) {
  const auto& o = options_;
  const double receptive = static_cast<double>(o.kernel_size() * o.kernel_size());
  const double fan_in = static_cast<double>(o.in_channels() / o.groups()) * receptive;
  const double fan_out = static_cast<double>(o.out_channels()) * receptive;
  init_weight(weight, o.init(), fan_in, fan_out, gen);
  init_bias(bias, o.init(), fan_in, gen);
}

torch::Tensor Conv2dImpl::effective_weight() const {
  if (!options_.standardize()) return weight;
  auto mean = weight.mean({1, 2, 3}, /*keepdim=*/true);
  auto var = weight.var({1, 2, 3}, /*unbiased=*/false, /*keepdim=*/true);
  return (weight - mean) / torch::sqrt(var + 1e-5);
}

torch::Tensor Conv2dImpl::forward(const torch::Tensor& x) {
  require_channels(x, options_.in_channels(), "Conv2d");
  return torch::conv2d(x, effective_weight(), bias, options_.stride(), padding_, 1, options_.groups());
}

DwConvImpl::DwConvImpl(DwConvOptions options) : options_(std::move(options)) {
  const auto& o = options_;
  if (o.kind() == ConvKind::depthwise_separable) {
    depthwise = register_module(
        "depthwise", Conv2d(ConvOptions(o.in_channels(), o.in_channels(), o.kernel_size())
                                .groups(o.in_channels())
                                .bias(false)));
    pointwise =
        register_module("pointwise", Conv2d(ConvOptions(o.in_channels(), o.out_channels(), 1).bias(o.bias())));
  } else {
    dense = register_module(
        "dense", Conv2d(ConvOptions(o.in_channels(), o.out_channels(), o.kernel_size()).bias(o.bias())));
  }
}

torch::Tensor DwConvImpl::forward(const torch::Tensor& x) {
  if (options_.kind() == ConvKind::standard) return dense->forward(x);
  return pointwise->forward(depthwise->forward(x));
}

void DwConvImpl::set_identity(double scale) {
  const auto& o = options_;
  if (o.in_channels() != o.out_channels()) {
    throw ShapeError("DwConv::set_identity requires in_channels == out_channels");
  }
  torch::NoGradGuard no_grad;
  const auto c = o.in_channels();
  const auto center = o.kernel_size() / 2;
  if (o.kind() == ConvKind::depthwise_separable) {
    depthwise->weight.zero_();
    depthwise->weight.index_put_({torch::indexing::Slice(), 0, center, center}, 1.0);
    if (depthwise->bias.defined()) depthwise->bias.zero_();
    pointwise->weight.copy_(torch::eye(c, pointwise->weight.options()).view({c, c, 1, 1}) * scale);
    if (pointwise->bias.defined()) pointwise->bias.zero_();
  } else {
    dense->weight.zero_();
    for (std::int64_t i = 0; i < c; ++i) dense->weight.index_put_({i, i, center, center}, scale);
    if (dense->bias.defined()) dense->bias.zero_();
  }
}

GroupNormImpl::GroupNormImpl(std::int64_t groups, std::int64_t channels, double eps)
    : groups_(groups), channels_(channels), eps_(eps) {
  if (groups < 1 || channels % groups != 0) {
    std::ostringstream msg;
    msg << "GroupNorm: " << channels << " channels not divisible into " << groups << " groups";
    throw ShapeError(msg.str());
  }
  weight = register_parameter("weight", torch::ones({channels}));
  bias = register_parameter("bias", torch::zeros({channels}));
}

void GroupNormImpl::reset_parameters(at::Generator&) {
  weight.fill_(1.0);
  bias.zero_();
}

torch::Tensor GroupNormImpl::forward(const torch::Tensor& x) {
  require_channels(x, channels_, "GroupNorm");
  return torch::group_norm(x, groups_, weight, bias, eps_);
}

LayerNormImpl::LayerNormImpl(std::int64_t dim, double eps) : dim_(dim), eps_(eps) {
  weight = register_parameter("weight", torch::ones({dim}));
  bias = register_parameter("bias", torch::zeros({dim}));
}

void LayerNormImpl::reset_parameters(at::Generator&) {
  weight.fill_(1.0);
  bias.zero_();
}

torch::Tensor LayerNormImpl::forward(const torch::Tensor& x) {
  return torch::layer_norm(x, {dim_}, weight, bias, eps_);
}

LinearImpl::LinearImpl(std::int64_t in_features, std::int64_t out_features, Init init) : init_(init) {
  weight = register_parameter("weight", torch::zeros({out_features, in_features}));
  bias = register_parameter("bias", torch::zeros({out_features}));
}

void LinearImpl::reset_parameters(at::Generator& gen) {
  const double fan_in = static_cast<double>(weight.size(1));
  const double fan_out = static_cast<double>(weight.size(0));
  init_weight(weight, init_, fan_in, fan_out, gen);
  init_bias(bias, init_, fan_in, gen);
}

torch::Tensor LinearImpl::forward(const torch::Tensor& x) { return torch::linear(x, weight, bias); }

std::int64_t norm_groups_for(std::int64_t channels) noexcept {
  for (std::int64_t g = 32; g > 1; --g) {
    if (channels % g == 0) return g;
  }
  return 1;
}

}  // namespace fmdseg::nn
