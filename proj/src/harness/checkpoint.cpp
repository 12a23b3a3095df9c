// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/checkpoint.hpp"

#include <cmath>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/network/archive.hpp"

namespace fmdseg::harness {

namespace {

constexpr const char* kMomentumPrefix = "state.optim.momentum.";

}  // namespace

std::map<std::string, torch::Tensor> snapshot_parameters(const torch::nn::Module& module) {
  std::map<std::string, torch::Tensor> out;
  for (const auto& item : module.named_parameters()) out.emplace(item.key(), item.value().detach().clone());
  return out;
}

void save_checkpoint(const TrainState& s, const std::filesystem::path& path) {
  network::TensorArchive a;
  a.meta["kind"] = "train_state";
  a.meta["config"] = format_config(s.config);
  a.meta["step"] = s.step;
  a.meta["epoch"] = s.epoch;
  a.meta["best_metric"] = std::isfinite(s.best_metric) ? nlohmann::json(s.best_metric) : nlohmann::json(nullptr);
  a.meta["batch_digest"] = std::to_string(s.batch_digest);
  a.meta["iterator"] = {{"epoch", s.iterator.epoch},
                        {"cursor", s.iterator.cursor},
                        {"shuffle_rng", s.iterator.shuffle_rng},
                        {"augment_rng", s.iterator.augment_rng}};
  for (const auto& [name, t] : s.params) a.tensors.emplace(name, t);
  for (const auto& [name, t] : s.momentum) a.tensors.emplace(kMomentumPrefix + name, t);

  const auto n = static_cast<std::int64_t>(s.history.size());
  auto steps = torch::empty({n}, torch::kInt64);
  auto losses = torch::empty({n}, torch::kFloat64);
  auto lrs = torch::empty({n}, torch::kFloat64);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& h = s.history[static_cast<std::size_t>(i)];
    steps[i] = h.step;
    losses[i] = h.loss;
    lrs[i] = h.lr;
  }
  a.tensors.emplace("state.history.step", steps);
  a.tensors.emplace("state.history.loss", losses);
  a.tensors.emplace("state.history.lr", lrs);
  a.tensors.emplace("state.iterator.permutation",
                    torch::tensor(s.iterator.permutation, torch::kInt64).reshape({static_cast<std::int64_t>(s.iterator.permutation.size())}));
  network::write_archive(a, path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  const auto a = network::read_archive(path);
  const auto where = "checkpoint " + path.string() + ": ";
  TrainState s;
  try {
    if (a.meta.at("kind").get<std::string>() != "train_state") throw FormatError(where + "not a training checkpoint");
    try {
      s.config = validate_config(parse_config(a.meta.at("config").get<std::string>()));
    } catch (const ConfigError& e) {
      throw FormatError(where + "embedded config is invalid: " + e.what());
    }
    s.step = a.meta.at("step").get<std::int64_t>();
    s.epoch = a.meta.at("epoch").get<std::int64_t>();
    const auto& best = a.meta.at("best_metric");
    s.best_metric = best.is_null() ? std::numeric_limits<double>::infinity() : best.get<double>();
    s.batch_digest = std::stoull(a.meta.at("batch_digest").get<std::string>());
    const auto& it = a.meta.at("iterator");
    s.iterator.epoch = it.at("epoch").get<std::int64_t>();
    s.iterator.cursor = it.at("cursor").get<std::int64_t>();
    s.iterator.shuffle_rng = it.at("shuffle_rng").get<std::string>();
    s.iterator.augment_rng = it.at("augment_rng").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + "malformed metadata: " + e.what());
  } catch (const std::invalid_argument&) {
    throw FormatError(where + "malformed batch digest");
  }

  auto column = [&](const std::string& name) -> const torch::Tensor& {
    const auto found = a.tensors.find(name);
    if (found == a.tensors.end()) throw FormatError(where + "missing tensor '" + name + "'");
    return found->second;
  };
  const auto& steps = column("state.history.step");
  const auto& losses = column("state.history.loss");
  const auto& lrs = column("state.history.lr");
  if (steps.numel() != losses.numel() || steps.numel() != lrs.numel()) {
    throw FormatError(where + "history columns differ in length");
  }
  const auto* st = steps.data_ptr<std::int64_t>();
  const auto* lo = losses.data_ptr<double>();
  const auto* lr = lrs.data_ptr<double>();
  for (std::int64_t i = 0; i < steps.numel(); ++i) s.history.push_back({st[i], lo[i], lr[i]});
  const auto& perm = column("state.iterator.permutation");
  s.iterator.permutation.assign(perm.data_ptr<std::int64_t>(), perm.data_ptr<std::int64_t>() + perm.numel());

  const std::string momentum_prefix = kMomentumPrefix;
  for (const auto& [name, t] : a.tensors) {
    if (name.rfind(momentum_prefix, 0) == 0) {
      s.momentum.emplace(name.substr(momentum_prefix.size()), t);
    } else if (name.rfind("state.", 0) != 0) {
      s.params.emplace(name, t);
    }
  }
  return s;
}

TrainState load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  auto s = load_checkpoint(path);
  if (!same_architecture(s.config, validate_config(expected))) {
    throw ConfigMismatchError("checkpoint " + path.string() + " was trained as variant '" +
                              std::string(to_string(s.config.variant)) + "' with skips " +
                              s.config.skip_layers().to_string() + "; the requested config is variant '" +
                              std::string(to_string(expected.variant)) + "' with skips " +
                              validate_config(expected).skip_layers().to_string() +
                              " (or differs in another architecture field)");
  }
  return s;
}

}  // namespace fmdseg::harness
