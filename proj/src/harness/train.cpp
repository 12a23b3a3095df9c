// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/train.hpp"

#include <cmath>
#include <fstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/harness/sgd.hpp"
#include "fmdseg/metrics/losses.hpp"

namespace fmdseg::harness {

namespace fs = std::filesystem;

void set_deterministic(bool on) {
  if (on) at::set_num_threads(1);
  at::globalContext().setDeterministicAlgorithms(on, /*warn_only=*/false);
}

std::uint64_t fold_batch_digest(std::uint64_t digest, const std::vector<std::int64_t>& indices) {
  for (const auto i : indices) {
    digest ^= static_cast<std::uint64_t>(i) + 0x9e3779b97f4a7c15ull + (digest << 6) + (digest >> 2);
  }
  return digest;
}

std::int64_t planned_steps(const ModelConfig& config, std::int64_t train_slices) {
  if (config.optimizer.max_steps > 0) return config.optimizer.max_steps;
  return static_cast<std::int64_t>(config.optimizer.max_epochs) *
         data::batches_per_epoch(train_slices, config.optimizer.batch_size);
}

void write_history_csv(const std::vector<HistoryEntry>& history, const fs::path& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "step,loss,lr\n";
  for (const auto& h : history) out << h.step << ',' << h.loss << ',' << h.lr << '\n';
  if (!out) throw IOError("cannot write " + path.string());
}

namespace {

std::vector<std::pair<std::string, torch::Tensor>> named_params(torch::nn::Module& m) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (auto& item : m.named_parameters()) out.emplace_back(item.key(), item.value());
  return out;
}

TrainState capture(const ModelConfig& config, torch::nn::Module& model, const Sgd& sgd,
                   const data::BatchIterator& batches, std::int64_t step, double best,
                   const std::vector<HistoryEntry>& history, std::uint64_t digest) {
  TrainState s;
  s.config = config;
  s.step = step;
  s.epoch = batches.epoch();
  s.best_metric = best;
  s.params = snapshot_parameters(model);
  for (const auto& [name, v] : sgd.momentum_buffers()) s.momentum.emplace(name, v.clone());
  s.iterator = batches.state();
  s.history = history;
  s.batch_digest = digest;
  return s;
}

}  // namespace

TrainResult train(const ModelConfig& raw_config, const data::SliceDataset& train_set, const TrainOptions& options,
                  const TrainState* resume) {
  const auto config = validate_config(raw_config);
  set_deterministic(options.deterministic);
  if (resume != nullptr && !same_architecture(resume->config, config)) {
    throw ConfigMismatchError("resume: checkpoint variant '" + std::string(to_string(resume->config.variant)) +
                              "' (skips " + resume->config.skip_layers().to_string() +
                              ") does not match the requested variant '" + std::string(to_string(config.variant)) +
                              "' (skips " + config.skip_layers().to_string() + ")");
  }

  auto model = network::build_variant(config, options.weights);
  model->train();
  Sgd sgd(named_params(*model), config.optimizer.momentum, config.optimizer.weight_decay);
  data::BatchIterator batches(train_set, config.optimizer.batch_size, config.augment, config.seed);

  std::int64_t step = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<HistoryEntry> history;
  std::uint64_t digest = 0;
  if (resume != nullptr) {
    network::load_weights(*model, resume->params, "resume state");
    sgd.load_momentum_buffers(resume->momentum);
    batches.restore(resume->iterator);
    step = resume->step;
    best = resume->best_metric;
    history = resume->history;
    digest = resume->batch_digest;
  }

  if (options.out_dir) {
    fs::create_directories(*options.out_dir);
    save_config_file(config, *options.out_dir / "config.cfg");
  }
  auto checkpoint_path = [&](const std::string& name) { return *options.out_dir / name; };

  const auto total = planned_steps(config, train_set.size());
  const auto stop = options.stop_at_step >= 0 ? std::min(options.stop_at_step, total) : total;
  while (step < stop) {
    // State before this step, kept for the divergence report.
    const auto batch_state = batches.state();
    auto batch = batches.next();
    const double lr = scheduled_lr(config.optimizer, step, total);

    sgd.zero_grad();
    const auto logits = model->forward(batch.images);
    const auto probs = torch::softmax(logits, 1);
    const auto terms = metrics::composite_loss_terms(probs, batch.labels, config.loss_weights);
    const double loss = terms.total.item<double>();
    if (!std::isfinite(loss)) {
      std::string last_good;
      if (options.out_dir) {
        auto s = capture(config, *model, sgd, batches, step, best, history, digest);
        s.iterator = batch_state;
        last_good = checkpoint_path("last_good.ckpt").string();
        save_checkpoint(s, last_good);
        write_history_csv(history, checkpoint_path("history.csv"));
      }
      throw DivergenceError("training diverged: non-finite loss at step " + std::to_string(step) +
                                (last_good.empty() ? "" : "; last good state saved to " + last_good),
                            step, last_good);
    }
    terms.total.backward();
    sgd.step(lr);
    digest = fold_batch_digest(digest, batch.indices);
    history.push_back({step, loss, lr});
    best = std::min(best, loss);
    ++step;
    if (options.on_step) {
      options.on_step({step, batch.epoch, loss, terms.cross_entropy.item<double>(), terms.dice.item<double>(), lr});
    }
    if (options.out_dir && options.checkpoint_every > 0 && step % options.checkpoint_every == 0 && step < stop) {
      save_checkpoint(capture(config, *model, sgd, batches, step, best, history, digest),
                      checkpoint_path("step_" + std::to_string(step) + ".ckpt"));
    }
  }

  TrainResult result;
  result.state = capture(config, *model, sgd, batches, step, best, history, digest);
  result.model = model;
  if (options.out_dir) {
    save_checkpoint(result.state, checkpoint_path("final.ckpt"));
    write_history_csv(history, checkpoint_path("history.csv"));
  }
  return result;
}

}  // namespace fmdseg::harness
