// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/evaluate.hpp"

#include "fmdseg/harness/checkpoint.hpp"

namespace fmdseg::harness {

metrics::EvalReport evaluate_model(network::FmdTransUNetImpl& model, const std::vector<data::CaseVolume>& cases,
                                   std::string name, int batch_size, const data::IntensityWindow& window) {
  torch::NoGradGuard no_grad;
  const bool was_training = model.is_training();
  model.eval();
  std::vector<metrics::CaseReport> rows;
  for (const auto& c : cases) {
    data::validate_case(c);
    std::vector<torch::Tensor> logits;
    for (std::int64_t z0 = 0; z0 < c.slices(); z0 += batch_size) {
      const auto z1 = std::min<std::int64_t>(z0 + batch_size, c.slices());
      std::vector<torch::Tensor> images;
      for (auto z = z0; z < z1; ++z) images.push_back(data::preprocess_slice(c.image[z], window));
      const auto out = model.forward(torch::stack(images).unsqueeze(1));
      for (std::int64_t i = 0; i < out.size(0); ++i) logits.push_back(out[i]);
    }
    const auto truth = LabelVolume::from_tensor(c.labels);
    rows.push_back(metrics::evaluate_case(logits, truth, c.spacing, c.id));
  }
  model.train(was_training);
  return metrics::aggregate(std::move(name), std::move(rows));
}

metrics::EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                        const std::vector<data::CaseVolume>& cases,
                                        const std::optional<ModelConfig>& expected, std::string name) {
  const auto state = expected ? load_checkpoint(checkpoint, *expected) : load_checkpoint(checkpoint);
  auto model = network::build_variant(state.config);
  network::load_weights(*model, state.params, checkpoint.string());
  if (name.empty()) name = std::string(to_string(state.config.variant));
  return evaluate_model(*model, cases, std::move(name), state.config.optimizer.batch_size);
}

void write_eval_outputs(const metrics::EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  metrics::table1({report}).write(dir / "table1");
  metrics::case_detail(report).write(dir / "cases");
}

}  // namespace fmdseg::harness
