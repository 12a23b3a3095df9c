// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/network/decoder.hpp"

#include <optional>
#include <sstream>

#include "fmdseg/core/config.hpp"
#include "fmdseg/core/errors.hpp"

namespace fmdseg::network {

namespace F = torch::nn::functional;

torch::Tensor upsample_to(const torch::Tensor& x, std::int64_t size) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<std::int64_t>{size, size})
                               .mode(torch::kBilinear)
                               .align_corners(true));
}

namespace {

nn::ConvOptions conv3x3(std::int64_t in, std::int64_t out) {
  return nn::ConvOptions(in, out, 3).init(nn::Init::kaiming_normal);
}

}  // namespace

DecoderStageImpl::DecoderStageImpl(std::int64_t in_channels, std::int64_t skip_channels,
                                   std::int64_t out_channels, std::int64_t resolution,
                                   const mewb::MewbOptions* mewb_options)
    : skip_channels_(skip_channels), resolution_(resolution) {
  fuse1 = register_module("fuse1", ConvNormAct(conv3x3(in_channels + skip_channels, out_channels)));
  fuse2 = register_module("fuse2", ConvNormAct(conv3x3(out_channels, out_channels)));
  if (mewb_options != nullptr) mewb = register_module("mewb", mewb::MewbBlock(*mewb_options));
}

torch::Tensor DecoderStageImpl::forward(const torch::Tensor& x, const torch::Tensor& skip,
                                        const ActivationProbe* probe, std::string_view probe_prefix) {
  auto y = upsample_to(x, resolution_);
  if (skip.defined()) {
    if (skip.dim() != 4 || skip.size(0) != y.size(0) || skip.size(1) != skip_channels_ ||
        skip.size(2) != resolution_ || skip.size(3) != resolution_) {
      std::ostringstream msg;
      msg << probe_prefix << ": skip of shape " << skip.sizes() << " does not match stage ("
          << y.size(0) << ", " << skip_channels_ << ", " << resolution_ << ", " << resolution_ << ")";
      throw ShapeError(msg.str());
    }
    y = torch::cat({y, skip}, 1);
  } else if (skip_channels_ != 0) {
    throw ShapeError(std::string(probe_prefix) + ": missing skip feature");
  }
  y = fuse2->forward(fuse1->forward(y));
  emit(probe, probe_name(probe_prefix, "fused"), y);
  if (mewb) y = mewb->forward(y, probe, probe_name(probe_prefix, "mewb"));
  emit(probe, probe_name(probe_prefix, "out"), y);
  return y;
}

DecoderImpl::DecoderImpl(DecoderOptions options) : options_(options) {
  const auto& w = options_.widths;
  const auto& s = options_.skip_widths;
  conv_more = register_module("conv_more", ConvNormAct(conv3x3(options_.hidden, options_.head_width)));
  const std::array<std::int64_t, 3> in = {options_.head_width, w[0], w[1]};
  const std::array<std::int64_t, 3> res = {kImageSize / 8, kImageSize / 4, kImageSize / 2};
  std::array<DecoderStage*, 3> stages = {&stage1, &stage2, &stage3};
  for (std::size_t i = 0; i < 3; ++i) {
    std::optional<mewb::MewbOptions> mo;
    if (options_.use_mewb) {
      mo = mewb::MewbOptions(w[i], res[i], res[i]).groups(options_.mewb_groups).ffn_expansion(options_.ffn_expansion);
    }
    *stages[i] = register_module("stage" + std::to_string(i + 1),
                                 DecoderStage(in[i], s[i], w[i], res[i], mo ? &*mo : nullptr));
  }
  final = register_module("final", ConvNormAct(conv3x3(w[2], w[3])));
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& tokens, const std::array<torch::Tensor, 3>& skips,
                                   const ActivationProbe* probe) {
  const auto g = options_.token_grid;
  if (tokens.dim() != 3 || tokens.size(1) != g * g || tokens.size(2) != options_.hidden) {
    std::ostringstream msg;
    msg << "decoder: expected tokens (B, " << g * g << ", " << options_.hidden << "), got " << tokens.sizes();
    throw ShapeError(msg.str());
  }
  auto x = tokens.transpose(1, 2).reshape({tokens.size(0), options_.hidden, g, g});
  constexpr std::int64_t bottleneck = kImageSize / kStemStride;
  if (g != bottleneck) x = upsample_to(x, bottleneck);
  x = conv_more->forward(x);
  emit(probe, "dec.conv_more", x);
  x = stage1->forward(x, skips[2], probe, "dec.stage1");
  x = stage2->forward(x, skips[1], probe, "dec.stage2");
  x = stage3->forward(x, skips[0], probe, "dec.stage3");
  x = final->forward(upsample_to(x, kImageSize));
  emit(probe, "dec.final", x);
  return x;
}

}  // namespace fmdseg::network
