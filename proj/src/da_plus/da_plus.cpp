// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/da_plus/da_plus.hpp"

#include "fmdseg/core/errors.hpp"

namespace fmdseg::da_plus {

DaPlusBlockImpl::DaPlusBlockImpl(DaPlusOptions options) : options_(std::move(options)) {
  const auto c = options_.channels();
  const auto r = options_.reduction();
  if (r < 1 || c % r != 0) {
    throw ShapeError("DA+: " + std::to_string(c) + " channels not divisible by reduction " + std::to_string(r));
  }
  inner_ = c / r;
  const auto kind = options_.conv_kind();
  auto dw = [kind](std::int64_t in, std::int64_t out) {
    return nn::DwConv(nn::DwConvOptions(in, out).kind(kind));
  };
  compress_pam = register_module("compress_pam", dw(c, inner_));
  compress_cam = register_module("compress_cam", dw(c, inner_));
  pam = register_module("pam", PositionAttention(inner_));
  cam = register_module("cam", ChannelAttention());
  project_pam = register_module("project_pam", dw(inner_, inner_));
  project_cam = register_module("project_cam", dw(inner_, inner_));
  restore = register_module("restore", dw(inner_, c));
}

torch::Tensor DaPlusBlockImpl::forward(const torch::Tensor& x, const ActivationProbe* probe,
                                       std::string_view probe_prefix) {
  require_channels(x, options_.channels(), "DA+");
  const auto eta1 = project_pam->forward(pam->forward(compress_pam->forward(x)));
  emit(probe, probe_name(probe_prefix, "eta1"), eta1);
  const auto eta2 = project_cam->forward(cam->forward(compress_cam->forward(x)));
  emit(probe, probe_name(probe_prefix, "eta2"), eta2);
  auto y = restore->forward(eta1 + eta2);
  emit(probe, probe_name(probe_prefix, "out"), y);
  return y;
}

}  // namespace fmdseg::da_plus
