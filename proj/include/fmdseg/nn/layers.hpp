// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/torch.h>

namespace fmdseg::nn {

/// A module that draws its own (non-child) parameters from a generator.
/// seed_parameters() visits every Seedable in a module tree.
class Seedable {
 public:
  virtual ~Seedable() = default;
  virtual void reset_parameters(at::Generator& gen) = 0;
};

enum class Init {
  uniform_fan_in,   // U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the torch default
  kaiming_normal,   // N(0, 2/fan_out), for convs followed by a ReLU
  xavier_uniform,
  zeros,
};

struct ConvOptions {
  ConvOptions(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel_size)
      : in_channels_(in_channels), out_channels_(out_channels), kernel_size_(kernel_size) {}
  TORCH_ARG(std::int64_t, in_channels);
  TORCH_ARG(std::int64_t, out_channels);
  TORCH_ARG(std::int64_t, kernel_size);
  TORCH_ARG(std::int64_t, stride) = 1;
  // Negative selects "same" padding for odd kernels.
  TORCH_ARG(std::int64_t, padding) = -1;
  TORCH_ARG(std::int64_t, groups) = 1;
  TORCH_ARG(bool, bias) = true;
  // Weight standardization per output filter, as in BiT/R50-ViT stems.
  TORCH_ARG(bool, standardize) = false;
  TORCH_ARG(Init, init) = Init::uniform_fan_in;
};

class Conv2dImpl : public torch::nn::Module, public Seedable {
 public:
  explicit Conv2dImpl(ConvOptions options);
  torch::Tensor forward(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;
  /// Kernel actually applied (standardized when the option is on).
  torch::Tensor effective_weight() const;
  const ConvOptions& options() const noexcept { return options_; }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  ConvOptions options_;
  std::int64_t padding_;
};
TORCH_MODULE(Conv2d);

enum class ConvKind { depthwise_separable, standard };

struct DwConvOptions {
  DwConvOptions(std::int64_t in_channels, std::int64_t out_channels)
      : in_channels_(in_channels), out_channels_(out_channels) {}
  TORCH_ARG(std::int64_t, in_channels);
  TORCH_ARG(std::int64_t, out_channels);
  TORCH_ARG(std::int64_t, kernel_size) = 3;
  TORCH_ARG(bool, bias) = true;
  TORCH_ARG(ConvKind, kind) = ConvKind::depthwise_separable;
};

/// Depthwise k x k convolution followed by a pointwise 1x1 to out_channels.
/// With kind=standard a single dense k x k convolution of the same shape is
/// used instead, which is what the separable form is benchmarked against.
class DwConvImpl : public torch::nn::Module {
 public:
  explicit DwConvImpl(DwConvOptions options);
  torch::Tensor forward(const torch::Tensor& x);
  const DwConvOptions& options() const noexcept { return options_; }

  /// Sets depthwise to a centered delta and pointwise to scale * identity
  /// (requires in == out). Used to build identity compositions in tests.
  void set_identity(double scale = 1.0);

  Conv2d depthwise{nullptr};
  Conv2d pointwise{nullptr};
  Conv2d dense{nullptr};

 private:
  DwConvOptions options_;
};
TORCH_MODULE(DwConv);

class GroupNormImpl : public torch::nn::Module, public Seedable {
 public:
  GroupNormImpl(std::int64_t groups, std::int64_t channels, double eps = 1e-5);
  torch::Tensor forward(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;
  std::int64_t groups() const noexcept { return groups_; }

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  std::int64_t groups_;
  std::int64_t channels_;
  double eps_;
};
TORCH_MODULE(GroupNorm);

class LayerNormImpl : public torch::nn::Module, public Seedable {
 public:
  explicit LayerNormImpl(std::int64_t dim, double eps = 1e-6);
  torch::Tensor forward(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  std::int64_t dim_;
  double eps_;
};
TORCH_MODULE(LayerNorm);

class LinearImpl : public torch::nn::Module, public Seedable {
 public:
  LinearImpl(std::int64_t in_features, std::int64_t out_features, Init init = Init::xavier_uniform);
  torch::Tensor forward(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;

  torch::Tensor weight;
  torch::Tensor bias;

 private:
  Init init_;
};
TORCH_MODULE(Linear);

/// Largest group count <= 32 that divides `channels` (GroupNorm in the stem
/// and decoder convolution blocks).
std::int64_t norm_groups_for(std::int64_t channels) noexcept;

}  // namespace fmdseg::nn
