// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/ablate.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::harness {

namespace fs = std::filesystem;

std::vector<std::string> table2_run_names() { return {"baseline", "only_mewb", "only_da_plus", "full"}; }
std::vector<std::string> table3_run_names() { return {"full_skip_none", "full_skip_1", "full_skip_1_2", "full"}; }
std::vector<SkipLayerSet> table3_skip_sets() {
  return {SkipLayerSet::none(), SkipLayerSet::first(1), SkipLayerSet::first(2), SkipLayerSet::first(3)};
}

void expand_plan(ExperimentPlan& plan) {
  plan.runs.clear();
  std::set<std::string> added;
  auto add = [&](const std::string& name, Variant v, std::optional<SkipLayerSet> skips) {
    if (!added.insert(name).second) return;
    auto c = plan.base;
    c.variant = v;
    c.skip_da_layers = skips;
    plan.runs.push_back({name, c});
  };
  if (plan.table2) {
    add("baseline", Variant::baseline, SkipLayerSet::none());
    add("only_mewb", Variant::only_mewb, SkipLayerSet::none());
    add("only_da_plus", Variant::only_da_plus, SkipLayerSet::all());
    add("full", Variant::full, SkipLayerSet::all());
  }
  if (plan.table3) {
    const auto names = table3_run_names();
    const auto sets = table3_skip_sets();
    for (std::size_t i = 0; i < names.size(); ++i) add(names[i], Variant::full, sets[i]);
  }
}

void validate_plan(const ExperimentPlan& plan) {
  std::set<std::string> names;
  for (const auto& r : plan.runs) {
    if (!names.insert(r.name).second) throw ConfigError("plan: duplicate run name '" + r.name + "'");
    try {
      validate_config(r.config);
    } catch (const ConfigError& e) {
      throw ConfigError("plan run '" + r.name + "': " + e.what());
    }
  }
  if (plan.runs.empty()) throw ConfigError("plan: no runs");
}

ExperimentPlan load_plan(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan file " + path.string());
  ExperimentPlan plan;
  fs::path config_path;
  std::ostringstream overrides;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw ConfigError("plan line " + std::to_string(line_no) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "name") {
      plan.name = value;
    } else if (key == "config") {
      config_path = path.parent_path() / value;
    } else if (key == "split") {
      plan.split_dir = path.parent_path() / value;
    } else if (key == "tables") {
      plan.table2 = value.find('2') != std::string::npos;
      plan.table3 = value.find('3') != std::string::npos;
    } else {
      overrides << key << " = " << value << '\n';
    }
  }
  std::string base_text;
  if (!config_path.empty()) {
    std::ifstream cin(config_path);
    if (!cin) throw ConfigError("plan: cannot open config file " + config_path.string());
    std::stringstream buf;
    buf << cin.rdbuf();
    base_text = buf.str();
  }
  plan.base = parse_config(base_text + "\n" + overrides.str());
  plan.base.skip_da_layers.reset();
  expand_plan(plan);
  validate_plan(plan);
  return plan;
}

AblationResult ablate(const ExperimentPlan& plan, const ExperimentData& data, const fs::path& out_dir,
                      TrainOptions options, const std::function<void(const RunOutcome&)>& on_run) {
  validate_plan(plan);
  data::validate_split(data.split);
  fs::create_directories(out_dir);
  AblationResult result;
  std::map<std::string, const RunOutcome*> by_name;
  for (const auto& run : plan.runs) {
    result.runs.push_back(run_experiment(run.name, run.config, data, out_dir, options));
    if (on_run) on_run(result.runs.back());
  }
  for (const auto& r : result.runs) by_name[r.name] = &r;

  auto report_or_placeholder = [&](const std::string& name) {
    auto r = by_name.at(name)->report;
    r.name = name;
    return r;
  };
  auto mark_failed = [&](metrics::Table& t, const std::vector<std::string>& names, std::size_t first_value) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (by_name.at(names[i])->ok) continue;
      for (std::size_t j = first_value; j < t.rows[i].size(); ++j) t.rows[i][j] = "failed";
    }
  };
  if (plan.table2) {
    std::vector<metrics::EvalReport> rows;
    for (const auto& name : table2_run_names()) rows.push_back(report_or_placeholder(name));
    result.table2 = metrics::table2(rows);
    mark_failed(result.table2, table2_run_names(), 1);
    result.table2.write(out_dir / "table2");
  }
  if (plan.table3) {
    std::vector<metrics::SkipAblationRow> rows;
    const auto names = table3_run_names();
    const auto sets = table3_skip_sets();
    for (std::size_t i = 0; i < names.size(); ++i) rows.push_back({sets[i], report_or_placeholder(names[i])});
    result.table3 = metrics::table3(rows);
    mark_failed(result.table3, names, 4);
    result.table3.write(out_dir / "table3");
  }

  std::optional<std::uint64_t> digest;
  std::ofstream audit(out_dir / "seed_audit.txt");
  audit << "# run batch_digest (identical digests = identical batch sequences)\n";
  metrics::Table status;
  status.header = {"run", "variant", "skip_da_layers", "status", "exit_code", "error"};
  for (const auto& r : result.runs) {
    status.rows.push_back({r.name, std::string(to_string(r.config.variant)),
                           validate_config(r.config).skip_layers().to_string(), r.ok ? "ok" : "failed",
                           std::to_string(r.exit_code), r.error});
    if (!r.ok) continue;
    audit << r.name << ' ' << r.batch_digest << '\n';
    if (digest && *digest != r.batch_digest) result.batch_sequences_match = false;
    digest = r.batch_digest;
  }
  audit << "match " << (result.batch_sequences_match ? "yes" : "NO") << '\n';
  std::ofstream(out_dir / "runs.csv") << status.to_csv();
  return result;
}

}  // namespace fmdseg::harness
