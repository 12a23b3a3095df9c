// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

#include <torch/torch.h>

#include "fmdseg/core/feature_map.hpp"
#include "fmdseg/da_plus/attention.hpp"
#include "fmdseg/nn/layers.hpp"

namespace fmdseg::da_plus {

struct DaPlusOptions {
  explicit DaPlusOptions(std::int64_t channels) : channels_(channels) {}
  TORCH_ARG(std::int64_t, channels);
  // Channel compression ratio between the outer convolutions.
  TORCH_ARG(std::int64_t, reduction) = 8;
  TORCH_ARG(nn::ConvKind, conv_kind) = nn::ConvKind::depthwise_separable;
};

/// Improved dual-attention block:
///   eta1 = DWConv(PAM(DWConv(x)))
///   eta2 = DWConv(CAM(DWConv(x)))
///   y    = DWConv(eta1 + eta2)
/// Inner width is C / reduction; the output has C channels again. No outer
/// residual. Probe names: "<prefix>.eta1", "<prefix>.eta2", "<prefix>.out".
class DaPlusBlockImpl : public torch::nn::Module {
 public:
  explicit DaPlusBlockImpl(DaPlusOptions options);

  torch::Tensor forward(const torch::Tensor& x, const ActivationProbe* probe = nullptr,
                        std::string_view probe_prefix = "da_plus");

  std::int64_t inner_channels() const noexcept { return inner_; }
  const DaPlusOptions& options() const noexcept { return options_; }

  nn::DwConv compress_pam{nullptr};
  nn::DwConv compress_cam{nullptr};
  PositionAttention pam{nullptr};
  ChannelAttention cam{nullptr};
  nn::DwConv project_pam{nullptr};
  nn::DwConv project_cam{nullptr};
  nn::DwConv restore{nullptr};

 private:
  DaPlusOptions options_;
  std::int64_t inner_;
};
TORCH_MODULE(DaPlusBlock);

}  // namespace fmdseg::da_plus
