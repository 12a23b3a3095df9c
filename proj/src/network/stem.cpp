// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/network/stem.hpp"

#include <sstream>

#include "fmdseg/core/config.hpp"
#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/feature_map.hpp"

namespace fmdseg::network {

ConvNormActImpl::ConvNormActImpl(nn::ConvOptions conv_options, bool relu) : relu_(relu) {
  const auto channels = conv_options.out_channels();
  conv = register_module("conv", nn::Conv2d(conv_options.bias(false)));
  norm = register_module("norm", nn::GroupNorm(nn::norm_groups_for(channels), channels));
}

torch::Tensor ConvNormActImpl::forward(const torch::Tensor& x) {
  auto y = norm->forward(conv->forward(x));
  return relu_ ? torch::relu(y) : y;
}

BottleneckImpl::BottleneckImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t stride) {
  const auto mid = std::max<std::int64_t>(1, out_channels / 4);
  auto std_conv = [](std::int64_t in, std::int64_t out, std::int64_t k) {
    return nn::ConvOptions(in, out, k).standardize(true).init(nn::Init::kaiming_normal);
  };
  reduce = register_module("reduce", ConvNormAct(std_conv(in_channels, mid, 1)));
  spatial = register_module("spatial", ConvNormAct(std_conv(mid, mid, 3).stride(stride)));
  expand = register_module("expand", ConvNormAct(std_conv(mid, out_channels, 1), /*relu=*/false));
  if (stride != 1 || in_channels != out_channels) {
    shortcut = register_module("shortcut",
                               ConvNormAct(std_conv(in_channels, out_channels, 1).stride(stride), false));
  }
}

torch::Tensor BottleneckImpl::forward(const torch::Tensor& x) {
  const auto residual = shortcut ? shortcut->forward(x) : x;
  const auto y = expand->forward(spatial->forward(reduce->forward(x)));
  return torch::relu(residual + y);
}

ResidualStageImpl::ResidualStageImpl(std::int64_t in_channels, std::int64_t out_channels,
                                     std::int64_t units, std::int64_t stride) {
  for (std::int64_t i = 0; i < units; ++i) {
    units_.push_back(register_module("unit" + std::to_string(i + 1),
                                     Bottleneck(i == 0 ? in_channels : out_channels, out_channels,
                                                i == 0 ? stride : 1)));
  }
}

torch::Tensor ResidualStageImpl::forward(torch::Tensor x) {
  for (auto& unit : units_) x = unit->forward(x);
  return x;
}

ConvStemImpl::ConvStemImpl(StemOptions options) : options_(options) {
  const auto& w = options_.widths;
  root = register_module("root", ConvNormAct(nn::ConvOptions(options_.in_channels, w[0], 7)
                                                 .stride(2)
                                                 .standardize(true)
                                                 .init(nn::Init::kaiming_normal)));
  block1 = register_module("block1", ResidualStage(w[0], w[1], options_.units[0], 1));
  block2 = register_module("block2", ResidualStage(w[1], w[2], options_.units[1], 2));
  block3 = register_module("block3", ResidualStage(w[2], w[3], options_.units[2], 2));
}

StemOutput ConvStemImpl::forward(const torch::Tensor& images) {
  require_feature_map(images, "conv_stem");
  if (images.size(2) != kImageSize || images.size(3) != kImageSize) {
    std::ostringstream msg;
    msg << "conv_stem: expected 224x224 input, got " << images.size(2) << "x" << images.size(3);
    throw ShapeError(msg.str());
  }
  auto x = images;
  if (x.size(1) != options_.in_channels) {
    if (x.size(1) != 1) {
      throw ShapeError("conv_stem: expected 1 or " + std::to_string(options_.in_channels) +
                       " input channels, got " + std::to_string(x.size(1)));
    }
    // Grayscale CT replicated to the width the stem was built (or pretrained) for.
    x = x.expand({x.size(0), options_.in_channels, x.size(2), x.size(3)});
  }
  StemOutput out;
  out.skips[0] = root->forward(x);
  const auto pooled = torch::max_pool2d(out.skips[0], {3, 3}, {2, 2}, {1, 1});
  out.skips[1] = block1->forward(pooled);
  out.skips[2] = block2->forward(out.skips[1]);
  out.features = block3->forward(out.skips[2]);
  return out;
}

}  // namespace fmdseg::network
