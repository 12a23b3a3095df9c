// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fmdseg/core/errors.hpp"
#include "fmdseg/data/phantom.hpp"
#include "fmdseg/harness/ablate.hpp"
#include "fmdseg/harness/checkpoint.hpp"
#include "fmdseg/harness/evaluate.hpp"
#include "fmdseg/harness/plot.hpp"
#include "fmdseg/harness/sgd.hpp"
#include "fmdseg/harness/sweep.hpp"
#include "fmdseg/harness/train.hpp"
#include "fmdseg/network/archive.hpp"
#include "oracles.hpp"

using namespace fmdseg;
using namespace fmdseg::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fmdseg_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const data::SliceDataset& tiny_set() {
  static const data::SliceDataset ds(data::make_synthetic_phantom(1, 3, data::PhantomOptions{4, 224}));
  return ds;
}

ModelConfig tiny_config(Variant v = Variant::full, std::int64_t steps = 4) {
  auto c = desk_config();
  c.variant = v;
  c.optimizer.batch_size = 2;
  c.optimizer.max_steps = steps;
  return c;
}

bool params_equal(const std::map<std::string, torch::Tensor>& a, const std::map<std::string, torch::Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end() || !torch::equal(v, it->second)) return false;
  }
  return true;
}

double scalar_of(const torch::Tensor& t) { return t.item<double>(); }

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("sgd matches the scalar recurrence and the hand trace") {
    auto p = torch::ones({1}, torch::kFloat64);
    Sgd sgd({{"p", p}}, 0.9, 0.01);
    oracle::ScalarSgd ref{1.0, 0.0, 0.1, 0.9, 0.01};
    const double grads[] = {0.5, -0.25, 1.0};
    const double hand[] = {0.949, 0.927151, 0.806559749};
    for (int k = 0; k < 3; ++k) {
      p.mutable_grad() = torch::full({1}, grads[k], torch::kFloat64);
      sgd.step(0.1);
      ref.step(grads[k]);
      CHECK(scalar_of(p) == ref.p);
      CHECK(std::abs(scalar_of(p) - hand[k]) <= 1e-12);
    }
    CHECK(scalar_of(sgd.momentum_buffers().at("p")) == ref.v);
  }

  TEST_CASE("weight decay alone decays geometrically") {
    auto p = torch::full({3}, 2.0, torch::kFloat64);
    Sgd sgd({{"p", p}}, 0.0, 1e-2);
    const double lr = 0.5;
    for (int k = 1; k <= 20; ++k) {
      p.mutable_grad() = torch::zeros({3}, torch::kFloat64);
      sgd.step(lr);
      CHECK(scalar_of(p[0]) == doctest::Approx(2.0 * std::pow(1.0 - lr * 1e-2, k)).epsilon(1e-12));
    }
    // A parameter without gradient behaves as g = 0.
    auto q = torch::full({1}, 1.0, torch::kFloat64);
    Sgd sgd2({{"q", q}}, 0.9, 0.1);
    sgd2.step(0.1);
    CHECK(scalar_of(q) == doctest::Approx(0.99));
  }

  TEST_CASE("momentum buffers round trip") {
    auto p = torch::ones({2});
    Sgd a({{"p", p}}, 0.9, 0.0);
    p.mutable_grad() = torch::ones({2});
    a.step(0.1);
    Sgd b({{"p", p}}, 0.9, 0.0);
    b.load_momentum_buffers(a.momentum_buffers());
    CHECK(torch::equal(b.momentum_buffers().at("p"), a.momentum_buffers().at("p")));
    CHECK_THROWS_AS(b.load_momentum_buffers({{"p", torch::ones({3})}}), FormatError);
  }

  TEST_CASE("learning-rate schedules") {
    OptimizerConfig o;
    CHECK(scheduled_lr(o, 0, 1000) == 0.01);
    CHECK(scheduled_lr(o, 1000, 1000) == 0.0);
    CHECK(poly_lr(0.01, 500, 1000, 0.9) == doctest::Approx(0.01 * std::pow(0.5, 0.9)));
    CHECK(scheduled_lr(o, 10, 1000) < scheduled_lr(o, 9, 1000));
    o.schedule = LrSchedule::constant;
    CHECK(scheduled_lr(o, 999, 1000) == 0.01);
  }

  TEST_CASE("planned steps follow epochs or the explicit budget") {
    auto c = desk_config();
    c.optimizer.batch_size = 6;
    c.optimizer.max_epochs = 200;
    CHECK(planned_steps(c, 2212) == 369 * 200);
    c.optimizer.max_steps = 300;
    CHECK(planned_steps(c, 2212) == 300);
  }

  TEST_CASE("checkpoints are byte-stable and config-checked") {
    const auto dir = scratch("ckpt");
    TrainOptions opts;
    opts.out_dir = dir / "run";
    auto result = train(tiny_config(Variant::full, 2), tiny_set(), opts);
    const auto first = dir / "run" / "final.ckpt";
    REQUIRE(fs::exists(first));
    auto state = load_checkpoint(first);
    CHECK(state.step == 2);
    CHECK(state.history.size() == 2);
    CHECK(params_equal(state.params, snapshot_parameters(*result.model)));
    save_checkpoint(state, dir / "again.ckpt");
    CHECK(slurp(first) == slurp(dir / "again.ckpt"));

    auto other = tiny_config(Variant::baseline);
    CHECK_THROWS_AS(load_checkpoint(first, other), ConfigMismatchError);
    auto same_arch = tiny_config(Variant::full, 99);
    same_arch.optimizer.learning_rate = 0.5;
    CHECK_NOTHROW(load_checkpoint(first, same_arch));
    CHECK_THROWS_AS(train(other, tiny_set(), {}, &state), ConfigMismatchError);

    // A checkpoint doubles as a weight file.
    auto model = network::build_variant(state.config, first);
    CHECK(params_equal(snapshot_parameters(*model), state.params));

    CHECK(fs::exists(dir / "run" / "history.csv"));
    CHECK(fs::exists(dir / "run" / "config.cfg"));
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IOError);
    fs::remove_all(dir);
  }

  TEST_CASE("deterministic runs and resume reproduce the trajectory") {
    auto c = tiny_config(Variant::full, 6);
    const auto a = train(c, tiny_set());
    const auto b = train(c, tiny_set());
    CHECK((a.state.history == b.state.history));
    CHECK(a.state.batch_digest == b.state.batch_digest);
    CHECK(params_equal(a.state.params, b.state.params));

    const auto dir = scratch("resume");
    TrainOptions first;
    first.stop_at_step = 3;
    first.out_dir = dir;
    const auto part = train(c, tiny_set(), first);
    CHECK(part.state.step == 3);
    const auto loaded = load_checkpoint(dir / "final.ckpt", c);
    const auto rest = train(c, tiny_set(), {}, &loaded);
    CHECK(rest.state.step == 6);
    CHECK((rest.state.history == a.state.history));
    CHECK(rest.state.batch_digest == a.state.batch_digest);
    CHECK(params_equal(rest.state.params, a.state.params));

    auto other_seed = c;
    other_seed.seed = 77;
    CHECK_FALSE((train(other_seed, tiny_set()).state.history == a.state.history));
    fs::remove_all(dir);
  }

  TEST_CASE("periodic checkpoints") {
    const auto dir = scratch("periodic");
    TrainOptions opts;
    opts.out_dir = dir;
    opts.checkpoint_every = 2;
    std::vector<StepRecord> seen;
    opts.on_step = [&](const StepRecord& r) { seen.push_back(r); };
    train(tiny_config(Variant::baseline, 4), tiny_set(), opts);
    CHECK(fs::exists(dir / "step_2.ckpt"));
    // The last step is saved once, as final.ckpt.
    CHECK_FALSE(fs::exists(dir / "step_4.ckpt"));
    CHECK(fs::exists(dir / "final.ckpt"));
    REQUIRE(seen.size() == 4);
    CHECK(seen[0].lr == 0.01);
    CHECK(seen[0].loss == doctest::Approx(0.6 * seen[0].cross_entropy + 0.4 * seen[0].dice));
    fs::remove_all(dir);
  }

  TEST_CASE("a non-finite loss aborts with the last good state") {
    const auto dir = scratch("diverge");
    auto c = tiny_config(Variant::baseline, 3);
    auto model = network::build_variant(c);
    network::TensorArchive weights;
    weights.tensors["head.bias"] = torch::full_like(model->head->bias, std::numeric_limits<float>::quiet_NaN());
    network::write_archive(weights, dir / "nan.ckpt");
    TrainOptions opts;
    opts.out_dir = dir / "run";
    opts.weights = dir / "nan.ckpt";
    CHECK_THROWS_AS(train(c, tiny_set(), opts), DivergenceError);
    CHECK(fs::exists(dir / "run" / "last_good.ckpt"));
    CHECK(exit_code_for(DivergenceError("x", 1, "")) == 3);
    fs::remove_all(dir);
  }

  TEST_CASE("training loss trends down on the phantom") {
    auto c = desk_config();
    c.variant = Variant::baseline;
    c.augment.enabled = false;
    c.optimizer.learning_rate = 0.2;
    c.optimizer.schedule = LrSchedule::constant;
    c.optimizer.batch_size = 2;
    c.optimizer.max_steps = 300;
    const data::SliceDataset ds(data::make_synthetic_phantom(2, 7));
    REQUIRE(ds.size() == 16);
    const auto r = train(c, ds);
    const auto& h = r.state.history;
    REQUIRE(h.size() == 300);
    std::vector<double> avg;
    double window = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      window += h[i].loss;
      if (i >= 50) window -= h[i - 50].loss;
      if (i >= 49) avg.push_back(window / 50.0);
    }
    double best = avg.front();
    for (std::size_t i = 0; i < avg.size(); ++i) {
      CAPTURE(i);
      CHECK(avg[i] <= best * 1.05);
      best = std::min(best, avg[i]);
    }
    CHECK(avg.back() < 0.5 * avg.front());
  }

  TEST_CASE("ground truth as prediction scores perfectly") {
    const auto cases = data::make_synthetic_phantom(2, 5, data::PhantomOptions{3, 224});
    std::vector<metrics::CaseReport> rows;
    for (const auto& c : cases) {
      const auto truth = LabelVolume::from_tensor(c.labels);
      rows.push_back(metrics::score_case(truth, truth, c.spacing, c.id));
    }
    const auto r = metrics::aggregate("truth", rows);
    CHECK(r.mean_dsc_pct == 100.0);
    CHECK(r.mean_hd == 0.0);
    for (const auto& o : r.per_organ) {
      CHECK(o.dsc_pct == 100.0);
      CHECK(o.hd == 0.0);
    }
  }

  TEST_CASE("untrained model on phantoms yields a finite report") {
    auto model = network::build_variant(tiny_config(Variant::full));
    const auto cases = data::make_synthetic_phantom(1, 6, data::PhantomOptions{2, 224});
    const auto r = evaluate_model(*model, cases, "untrained");
    CHECK(r.case_count == 1);
    CHECK(std::isfinite(r.mean_dsc_pct));
    CHECK(std::isfinite(r.mean_hd));
    for (const auto& o : r.per_organ) {
      CHECK(std::isfinite(o.hd));
      CHECK(std::isfinite(o.hd95));
    }
    const auto dir = scratch("eval");
    write_eval_outputs(r, dir);
    CHECK(fs::exists(dir / "table1.csv"));
    CHECK(fs::exists(dir / "cases.md"));
    fs::remove_all(dir);
  }

  TEST_CASE("loss grid parsing") {
    const auto grid = default_loss_grid();
    REQUIRE(grid.size() == 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(grid[i].w_c == doctest::Approx(0.5 + 0.1 * static_cast<double>(i)));
      CHECK(grid[i].w_c + grid[i].w_d == doctest::Approx(1.0));
    }
    CHECK((parse_loss_grid("0.5:0.5,0.6:0.4,0.7:0.3,0.8:0.2") == grid));
    CHECK(parse_loss_grid(" 0.9 : 0.1 ").size() == 1);
    CHECK_THROWS_AS(parse_loss_grid("0.5:0.4"), ConfigError);
    CHECK_THROWS_AS(parse_loss_grid("1.2:-0.2"), ConfigError);
    CHECK_THROWS_AS(parse_loss_grid("a:b"), ConfigError);
    CHECK_THROWS_AS(parse_loss_grid(""), ConfigError);
    CHECK(sweep_run_name({0.6, 0.4}) == "wc0.60_wd0.40");
  }

  TEST_CASE("ablation plans") {
    ExperimentPlan plan;
    plan.base = desk_config();
    expand_plan(plan);
    CHECK(plan.runs.size() == 7);
    for (const auto& name : table2_run_names()) {
      CHECK(std::any_of(plan.runs.begin(), plan.runs.end(), [&](const PlanRun& r) { return r.name == name; }));
    }
    const auto sets = table3_skip_sets();
    REQUIRE(sets.size() == 4);
    CHECK(sets[0] == SkipLayerSet::none());
    CHECK(sets[3] == SkipLayerSet::all());
    for (const auto& r : plan.runs) {
      CHECK(r.config.seed == plan.base.seed);
      CHECK(r.config.optimizer == plan.base.optimizer);
    }
    CHECK_NOTHROW(validate_plan(plan));
    auto dup = plan;
    dup.runs.push_back(dup.runs.front());
    CHECK_THROWS_AS(validate_plan(dup), ConfigError);

    const auto dir = scratch("plan");
    save_config_file(desk_config(), dir / "desk.cfg");
    std::ofstream(dir / "p.plan") << "name = mini\nconfig = desk.cfg\ntables = 3\noptimizer.max_steps = 5\n";
    const auto loaded = load_plan(dir / "p.plan");
    CHECK(loaded.name == "mini");
    CHECK_FALSE(loaded.table2);
    CHECK(loaded.table3);
    CHECK(loaded.base.optimizer.max_steps == 5);
    fs::remove_all(dir);
  }

  TEST_CASE("sweep plot rendering") {
    const auto svg = sweep_plot_svg({{"DSC (%)", {{0.5, 70.0}, {0.6, 72.0}}}, {"HD (mm)", {}}}, "w_c");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("no data") != std::string::npos);
    CHECK(format_fixed_weight(0.6) == "0.60");
  }
}
