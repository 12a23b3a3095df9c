// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "fmdseg/core/errors.hpp"
#include "fmdseg/metrics/losses.hpp"
#include "fmdseg/metrics/metrics.hpp"
#include "fmdseg/metrics/report.hpp"
#include "oracles.hpp"

using namespace fmdseg;
using namespace fmdseg::metrics;

namespace {

torch::Tensor one_hot_probs(const torch::Tensor& labels, std::int64_t classes) {
  return torch::one_hot(labels, classes).permute({0, 3, 1, 2}).to(torch::kFloat64);
}

torch::Tensor random_probs(std::vector<std::int64_t> shape, std::uint64_t seed) {
  torch::manual_seed(seed);
  return torch::softmax(torch::randn(shape, torch::kFloat64), 1);
}

torch::Tensor random_labels(std::int64_t b, std::int64_t h, std::int64_t w, std::int64_t classes, std::uint64_t seed) {
  torch::manual_seed(seed);
  return torch::randint(0, classes, {b, h, w}, torch::kLong);
}

LabelVolume to_volume(const oracle::Mask& m, std::uint8_t label = 1) {
  LabelVolume v(m.depth, m.height, m.width);
  for (std::size_t i = 0; i < m.data.size(); ++i) v.data()[i] = m.data[i] ? label : 0;
  return v;
}

LabelVolume block(std::int64_t h, std::int64_t w, std::int64_t y0, std::int64_t x0, std::int64_t bh, std::int64_t bw,
                  std::uint8_t label = 1) {
  LabelVolume v(1, h, w);
  for (std::int64_t y = y0; y < y0 + bh; ++y)
    for (std::int64_t x = x0; x < x0 + bw; ++x) v.at(0, y, x) = label;
  return v;
}

// Distinct square per organ on a 1x32x32 grid.
LabelVolume organ_grid() {
  LabelVolume v(2, 32, 32);
  for (int organ = 1; organ <= kNumOrgans; ++organ) {
    const auto y0 = ((organ - 1) / 4) * 16 + 2, x0 = ((organ - 1) % 4) * 8 + 1;
    for (std::int64_t z = 0; z < 2; ++z)
      for (std::int64_t y = y0; y < y0 + 6; ++y)
        for (std::int64_t x = x0; x < x0 + 5; ++x) v.at(z, y, x) = static_cast<std::uint8_t>(organ);
  }
  return v;
}

std::vector<torch::Tensor> logits_for(const LabelVolume& v) {
  std::vector<torch::Tensor> slices;
  auto t = v.to_tensor().to(torch::kLong);
  for (std::int64_t z = 0; z < v.depth(); ++z) {
    slices.push_back(torch::one_hot(t[z], kNumClasses).permute({2, 0, 1}).to(torch::kFloat32) * 5.0);
  }
  return slices;
}

}  // namespace

TEST_SUITE("losses_metrics") {
  TEST_CASE("cross entropy closed forms") {
    auto labels = random_labels(2, 8, 8, 9, 1);
    CHECK(metrics::cross_entropy_loss(one_hot_probs(labels, 9), labels).item<double>() <= 1e-9);
    auto uniform = torch::full({2, 9, 8, 8}, 1.0 / 9.0, torch::kFloat64);
    CHECK(metrics::cross_entropy_loss(uniform, labels).item<double>() == doctest::Approx(std::log(9.0)).epsilon(1e-12));
    CHECK(std::abs(metrics::cross_entropy_loss(uniform, labels).item<double>() - 2.1972) < 1e-4);
  }

  TEST_CASE("cross entropy stays finite on zero probabilities") {
    auto labels = torch::zeros({1, 2, 2}, torch::kLong);
    auto probs = one_hot_probs(torch::ones({1, 2, 2}, torch::kLong), 9);
    const auto v = metrics::cross_entropy_loss(probs, labels).item<double>();
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(-std::log(1e-12)));
  }

  TEST_CASE("dice loss closed forms") {
    auto labels = random_labels(2, 8, 8, 9, 2);
    // Every class present so the smoothing term is negligible.
    labels.view({-1}).slice(0, 0, 9).copy_(torch::arange(9));
    const auto exact = metrics::dice_loss(one_hot_probs(labels, 9), labels).item<double>();
    CHECK(exact >= 0.0);
    CHECK(exact <= 1e-4);

    auto truth = torch::zeros({1, 4, 4}, torch::kLong);
    auto probs = one_hot_probs(torch::ones({1, 4, 4}, torch::kLong), 9);
    auto per_class = metrics::dice_loss_per_class(probs, truth);
    CHECK(per_class[0].item<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(per_class[1].item<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(per_class[2].item<double>() == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("dice loss agrees with a scalar evaluation of the formula") {
    auto probs = random_probs({1, 2, 4, 4}, 3);
    auto labels = random_labels(1, 4, 4, 2, 4);
    auto p = probs.accessor<double, 4>();
    auto y = labels.accessor<std::int64_t, 3>();
    double total = 0.0;
    for (int c = 0; c < 2; ++c) {
      double inter = 0.0, pp = 0.0, yy = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const double yi = y[0][i][j] == c ? 1.0 : 0.0;
          inter += yi * p[0][c][i][j];
          pp += p[0][c][i][j] * p[0][c][i][j];
          yy += yi * yi;
        }
      total += 1.0 - (2.0 * inter + 1e-5) / (pp + yy + 1e-5);
    }
    CHECK(std::abs(metrics::dice_loss(probs, labels).item<double>() - total / 2.0) < 1e-12);
    const auto v = metrics::dice_loss(probs, labels).item<double>();
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  TEST_CASE("loss gradients match central differences") {
    auto labels = random_labels(2, 5, 5, 9, 5);
    torch::manual_seed(6);
    auto logits = torch::randn({2, 9, 5, 5}, torch::kFloat64).requires_grad_(true);
    SUBCASE("cross entropy") {
      CHECK(oracle::max_gradient_error([&] { return metrics::cross_entropy_loss(torch::softmax(logits, 1), labels); },
                                       {logits}) < 1e-5);
    }
    SUBCASE("dice") {
      CHECK(oracle::max_gradient_error([&] { return metrics::dice_loss(torch::softmax(logits, 1), labels); }, {logits}) <
            1e-5);
    }
    SUBCASE("composite") {
      CHECK(oracle::max_gradient_error(
                [&] { return metrics::composite_loss(torch::softmax(logits, 1), labels, LossWeights{0.6, 0.4}); }, {logits}) <
            1e-5);
    }
  }

  TEST_CASE("composite loss weighting") {
    auto probs = random_probs({2, 9, 6, 6}, 7);
    auto labels = random_labels(2, 6, 6, 9, 8);
    const auto ce = metrics::cross_entropy_loss(probs, labels);
    const auto dl = metrics::dice_loss(probs, labels);
    CHECK(torch::equal(metrics::composite_loss(probs, labels, {1.0, 0.0}), ce));
    CHECK(torch::equal(metrics::composite_loss(probs, labels, {0.0, 1.0}), dl));
    const auto terms = metrics::composite_loss_terms(probs, labels, {0.6, 0.4});
    CHECK(torch::equal(terms.total, 0.6 * ce + 0.4 * dl));
    CHECK(torch::equal(terms.cross_entropy, ce));
    CHECK(torch::equal(terms.dice, dl));

    // Affine in w_c: the grid points are collinear with slope L_c - L_d.
    std::vector<double> values;
    for (double wc : {0.5, 0.6, 0.7, 0.8}) values.push_back(metrics::composite_loss(probs, labels, {wc, 1.0 - wc}).item<double>());
    const double slope = (values[3] - values[0]) / 0.3;
    CHECK(slope == doctest::Approx(ce.item<double>() - dl.item<double>()).epsilon(1e-10));
    for (std::size_t i = 0; i < values.size(); ++i) {
      CHECK(values[i] == doctest::Approx(values[0] + slope * 0.1 * static_cast<double>(i)).epsilon(1e-12));
    }
  }

  TEST_CASE("losses reject mismatched shapes") {
    auto probs = random_probs({1, 9, 4, 4}, 9);
    CHECK_THROWS_AS(metrics::cross_entropy_loss(probs, torch::zeros({1, 4, 5}, torch::kLong)), ShapeError);
    CHECK_THROWS_AS(metrics::dice_loss(probs, torch::zeros({2, 4, 4}, torch::kLong)), ShapeError);
    CHECK_THROWS_AS(metrics::dice_loss(probs[0], torch::zeros({4, 4}, torch::kLong)), ShapeError);
  }

  TEST_CASE("dsc hand cases") {
    const auto t = block(8, 8, 2, 2, 2, 4);
    const auto p = block(8, 8, 2, 2, 2, 2);
    CHECK(dsc(p, t, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(dsc(t, t, 1) == 1.0);
    CHECK(dsc(block(8, 8, 0, 0, 2, 2), block(8, 8, 5, 5, 2, 2), 1) == 0.0);
    CHECK(dsc(LabelVolume(1, 8, 8), LabelVolume(1, 8, 8), 1) == 1.0);
    CHECK_THROWS_AS(dsc(LabelVolume(1, 8, 8), LabelVolume(1, 8, 9), 1), ShapeError);
  }

  TEST_CASE("hausdorff hand cases") {
    const Spacing unit;
    auto h = hausdorff(std::vector<Point>{{0, 0, 0}}, std::vector<Point>{{0, 3, 4}}, unit);
    CHECK(h.hd == 5.0);
    CHECK(h.hd95 == 5.0);
    const auto t = block(16, 16, 3, 3, 5, 6);
    CHECK(hausdorff(t, t, 1, unit).hd == 0.0);
    CHECK(hausdorff(t, t, 1, unit).hd95 == 0.0);
    CHECK_THROWS_AS(hausdorff(t, LabelVolume(1, 16, 16), 1, unit), EmptyMaskError);
    CHECK(hausdorff(std::vector<Point>{{0, 0, 0}}, std::vector<Point>{{1, 0, 0}}, Spacing{2.5, 1.0, 1.0}).hd == 2.5);
  }

  TEST_CASE("dsc and hausdorff match brute-force oracles on random masks") {
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<int> side(1, 16), depth(1, 4);
    std::uniform_real_distribution<double> density(0.05, 0.6);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto d = trial < 100 ? 1 : depth(rng);
      const auto hgt = side(rng), wid = side(rng);
      const auto a = oracle::random_mask(rng, d, hgt, wid, density(rng));
      const auto b = oracle::random_mask(rng, d, hgt, wid, density(rng));
      const auto va = to_volume(a), vb = to_volume(b);
      CAPTURE(trial);
      CHECK(dsc(va, vb, 1) == doctest::Approx(oracle::dice(a, b)).epsilon(1e-15));
      CHECK(dsc(va, vb, 1) == dsc(vb, va, 1));
      const auto ba = boundary_points(va, 1);
      const auto oa = oracle::boundary(a);
      CHECK(ba.size() == oa.size());
      if (a.count() == 0 || b.count() == 0) continue;
      ++compared;
      const auto fast = hausdorff(va, vb, 1, Spacing{});
      const auto slow = oracle::hausdorff(a, b, {1.0, 1.0, 1.0});
      CHECK(fast.hd == slow.hd);
      CHECK(fast.hd95 == slow.hd95);
      const auto rev = hausdorff(vb, va, 1, Spacing{});
      CHECK(rev.hd == fast.hd);
      CHECK(rev.hd95 == fast.hd95);
      const Spacing aniso{2.5, 0.75, 1.25};
      const auto fa = hausdorff(va, vb, 1, aniso);
      const auto sa = oracle::hausdorff(a, b, {2.5, 0.75, 1.25});
      CHECK(fa.hd == doctest::Approx(sa.hd).epsilon(1e-12));
      CHECK(fa.hd95 == doctest::Approx(sa.hd95).epsilon(1e-12));
    }
    CHECK(compared > 150);
  }

  TEST_CASE("percentile matches linear interpolation") {
    CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 95.0) == doctest::Approx(3.85).epsilon(1e-15));
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 50.0) == doctest::Approx(2.5));
    CHECK(percentile({7.0}, 95.0) == 7.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<double> v(101);
    for (auto& x : v) x = n(rng);
    for (double q : {0.0, 12.5, 50.0, 95.0, 100.0}) CHECK(percentile(v, q) == oracle::percentile(v, q));
  }

  TEST_CASE("one-hot dice loss is one minus smoothed dsc") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      auto labels = random_labels(1, 12, 12, 9, 100 + trial);
      auto pred = random_labels(1, 12, 12, 9, 200 + trial);
      auto per_class = metrics::dice_loss_per_class(one_hot_probs(pred, 9), labels);
      const auto pv = LabelVolume::from_tensor(pred[0]), tv = LabelVolume::from_tensor(labels[0]);
      for (int c = 0; c < 9; ++c) {
        CAPTURE(c);
        CHECK(std::abs(1.0 - per_class[c].item<double>() - dsc(pv, tv, c)) < 1e-4);
      }
    }
  }

  TEST_CASE("evaluate_case identity, locality and slice count") {
    const auto truth = organ_grid();
    const Spacing spacing{3.0, 0.8, 0.8};
    const auto same = evaluate_case(logits_for(truth), truth, spacing, "c0");
    CHECK(same.case_id == "c0");
    for (const auto& o : same.organs) {
      CHECK(o.dsc == 1.0);
      CHECK(o.hd == 0.0);
      CHECK(o.defined());
      CHECK_FALSE(o.flagged());
    }
    CHECK(same.mean_dsc == 1.0);

    auto perturbed = truth;
    perturbed.at(1, 3, 3) = 0;  // inside organ 1
    const auto moved = evaluate_case(logits_for(perturbed), truth, spacing);
    for (int organ = 1; organ <= kNumOrgans; ++organ) {
      CAPTURE(organ);
      const auto& o = moved.organs[static_cast<std::size_t>(organ - 1)];
      if (organ == 1) {
        CHECK(o.dsc < 1.0);
      } else {
        CHECK(o.dsc == 1.0);
        CHECK(o.hd == 0.0);
      }
    }

    auto short_logits = logits_for(truth);
    short_logits.pop_back();
    CHECK_THROWS_AS(evaluate_case(short_logits, truth, spacing), MissingSliceError);
  }

  TEST_CASE("evaluate_case resizes logits to the label grid") {
    const auto truth = organ_grid();
    auto logits = logits_for(truth);
    for (auto& l : logits) {
      l = torch::nn::functional::interpolate(
              l.unsqueeze(0),
              torch::nn::functional::InterpolateFuncOptions().size(std::vector<std::int64_t>{64, 64}).mode(torch::kNearest))
              .squeeze(0);
    }
    const auto r = evaluate_case(logits, truth, Spacing{});
    CHECK(r.mean_dsc == 1.0);
  }

  TEST_CASE("empty-mask policy") {
    auto truth = organ_grid();
    auto pred = truth;
    for (auto& v : pred.data())
      if (v == 2) v = 0;
    for (auto& v : truth.data())
      if (v == 3) v = 0;
    for (auto& v : pred.data())
      if (v == 3) v = 0;
    const Spacing spacing{2.0, 1.0, 1.0};
    const auto r = score_case(pred, truth, spacing);
    const auto& missed = r.organs[1];
    CHECK(missed.flagged());
    CHECK(missed.dsc == 0.0);
    CHECK(missed.hd == doctest::Approx(volume_diagonal(2, 32, 32, spacing)));
    CHECK(missed.hd == doctest::Approx(std::sqrt(2.0 * 2.0 + 31.0 * 31.0 * 2.0)));
    const auto& absent = r.organs[2];
    CHECK_FALSE(absent.defined());
    CHECK(absent.dsc == 1.0);
    CHECK(absent.hd == 0.0);
    CHECK(r.flagged());
    // Seven defined organs: six perfect plus one flagged miss.
    CHECK(r.mean_dsc == doctest::Approx(6.0 / 7.0));

    const auto report = aggregate("m", {r, score_case(truth, truth, spacing)});
    CHECK(report.case_count == 2);
    CHECK(report.flagged_entries == 1);
    CHECK(report.per_organ[2].defined_cases == 0);
    CHECK(report.per_organ[1].flagged_cases == 1);
    CHECK(report.per_organ[1].dsc_pct == doctest::Approx(50.0));
  }

  TEST_CASE("aggregate reduces in case order") {
    const auto truth = organ_grid();
    auto pred = truth;
    for (std::size_t i = 0; i < pred.data().size(); i += 7) pred.data()[i] = 0;
    const auto a = score_case(pred, truth, Spacing{}, "a"), b = score_case(truth, truth, Spacing{}, "b");
    const auto r1 = aggregate("x", {a, b});
    const auto r2 = aggregate("x", {a, b});
    CHECK(r1.mean_dsc_pct == r2.mean_dsc_pct);
    CHECK(r1.mean_hd == r2.mean_hd);
    double sum = 0.0;
    for (const auto& o : r1.per_organ) sum += o.dsc_pct;
    CHECK(r1.mean_dsc_pct == doctest::Approx(sum / 8.0).epsilon(1e-12));
  }

  TEST_CASE("report table layouts") {
    const auto truth = organ_grid();
    auto report = aggregate("full", {score_case(truth, truth, Spacing{})});
    const auto t1 = table1({report});
    REQUIRE(t1.header.size() == 11);
    CHECK(t1.header[0] == "Model");
    CHECK(t1.header[1] == "DSC(%)");
    CHECK(t1.header[2] == "HD(mm)");
    const std::vector<std::string> organs = {"Aorta", "Gallbladder", "Kidney (L)", "Kidney (R)",
                                             "Liver", "Pancreas",    "Spleen",     "Stomach"};
    for (std::size_t i = 0; i < organs.size(); ++i) CHECK(t1.header[i + 3] == organs[i]);
    REQUIRE(t1.rows.size() == 1);
    CHECK(t1.rows[0][0] == "full");
    CHECK(t1.rows[0][1] == "100.00");
    CHECK(t1.to_csv().rfind("Model,DSC(%),HD(mm),Aorta", 0) == 0);
    CHECK(t1.to_markdown().find("| full |") != std::string::npos);

    const auto t2 = table2({report, report});
    CHECK(t2.header.size() == 3 + 16);
    CHECK(t2.rows.size() == 2);

    const auto t3 = table3({{SkipLayerSet::none(), report}, {SkipLayerSet::first(2), report}});
    CHECK(t3.header.size() == 6);
    REQUIRE(t3.rows.size() == 2);
    CHECK(t3.rows[1][1] != t3.rows[1][3]);

    const auto detail = case_detail(report);
    CHECK(detail.rows.size() == 8);
  }
}
