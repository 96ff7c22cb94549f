// Copyright 2026 The Trajcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajcast/pipeline/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "trajcast/core/errors.hpp"
#include "trajcast/envsim/dataset.hpp"
#include "trajcast/heatmap/heatmap.hpp"
#include "trajcast/pipeline/evaluate.hpp"
#include "trajcast/pipeline/plots.hpp"
#include "trajcast/pipeline/trainer.hpp"
#include "trajcast/stats/stats.hpp"

namespace trajcast::pipeline
{

namespace
{

constexpr const char * kCsvHeader = "scene_id,k,min_ade,min_fde,kde_nll,ecfl";

std::string canonical_metric(const std::string & name)
{
  if (name == "ade" || name == "min_ade") {
    return "min_ade";
  }
  if (name == "fde" || name == "min_fde") {
    return "min_fde";
  }
  if (name == "kde_nll" || name == "ecfl") {
    return name;
  }
  throw DataError("stats: unknown metric " + name);
}

int metric_column(const std::string & canonical)
{
  if (canonical == "min_ade") {
    return 2;
  }
  if (canonical == "min_fde") {
    return 3;
  }
  if (canonical == "kde_nll") {
    return 4;
  }
  return 5;
}

// scene_id -> metric value for one method's CSV; the aggregate row is not a
// scene and is skipped.
std::map<std::string, double> read_metric_csv(const std::string & path, int column)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("stats: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DataError("stats: " + path + " is not a metric CSV (bad header)");
  }
  std::map<std::string, double> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
      fields.push_back(f);
    }
    if (fields.size() != 6) {
      throw DataError("stats: " + path + ":" + std::to_string(lineno) + ": expected 6 fields");
    }
    if (fields[0] == "mean") {
      continue;
    }
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(fields[static_cast<std::size_t>(column)], &used);
      if (used != fields[static_cast<std::size_t>(column)].size()) {
        throw std::invalid_argument("trailing characters");
      }
    } catch (const std::exception &) {
      throw DataError("stats: " + path + ":" + std::to_string(lineno) + ": bad numeric value");
    }
    if (!out.emplace(fields[0], value).second) {
      throw DataError("stats: " + path + ": duplicate scene_id " + fields[0]);
    }
  }
  if (out.empty()) {
    throw DataError("stats: " + path + " holds no scene rows");
  }
  return out;
}

void apply_ablations(RunConfig & cfg, const std::vector<std::string> & names)
{
  for (const std::string & n : names) {
    if (n == "without_sg_net") {
      cfg.ablation.without_sg_net = true;
    } else if (n == "without_micro") {
      cfg.ablation.without_micro = true;
    } else if (n == "without_ll_prior") {
      cfg.ablation.without_ll_prior = true;
    } else {
      throw DataError("unknown ablation flag " + n);
    }
  }
}

Dataset open_dataset(const RunConfig & cfg)
{
  return load_dataset(cfg.dataset.data_dir, cfg.dataset.t_p + cfg.dataset.t_f);
}

int cmd_simulate(const RunConfig & cfg)
{
  envsim::DatasetSpec spec;
  spec.seed = cfg.simulate.seed;
  spec.train_envs = cfg.simulate.train_envs;
  spec.val_envs = cfg.simulate.val_envs;
  spec.test_envs = cfg.simulate.test_envs;
  spec.scenes_per_env = cfg.simulate.scenes_per_env;
  spec.t_p = cfg.dataset.t_p;
  spec.t_f = cfg.dataset.t_f;
  spec.workers = cfg.simulate.workers;
  spec.env.grid_h = cfg.simulate.grid_size;
  spec.env.grid_w = cfg.simulate.grid_size;
  spec.env.px_per_m = cfg.simulate.px_per_m;
  const auto summary = envsim::build_dataset(spec, cfg.dataset.data_dir);
  std::cout << "simulate: " << summary.env_count << " environments, " << summary.path_count
            << " paths, " << summary.record_count << " records -> " << cfg.dataset.data_dir
            << "\n";
  return 0;
}

int cmd_train(const RunConfig & cfg, const std::string & out_dir, const std::string & stage)
{
  const Dataset data = open_dataset(cfg);
  Trainer trainer(cfg, data, out_dir);
  trainer.run(stage);
  std::cout << "train: stage " << stage << " done -> " << out_dir << "/checkpoints\n";
  return 0;
}

int cmd_evaluate(const RunConfig & cfg, const std::string & out_dir)
{
  const Dataset data = open_dataset(cfg);
  const Forecaster fc(cfg, data, out_dir + "/checkpoints");
  for (const int k : cfg.eval.k_list) {
    const auto report = evaluate_split(fc, k);
    write_metric_report(report, fc, k, out_dir);
    const auto agg = report.aggregate();
    std::printf("evaluate: k=%d split=%s scenes=%zu min_ade=%.6f min_fde=%.6f kde_nll=%.6f "
                "ecfl=%.6f\n",
                k, cfg.eval.split.c_str(), report.scenes.size(), agg.min_ade, agg.min_fde,
                agg.kde_nll, agg.ecfl);
  }
  return 0;
}

int cmd_plot(const RunConfig & cfg, const std::string & out_dir, int k, int count)
{
  const Dataset data = open_dataset(cfg);
  const Forecaster fc(cfg, data, out_dir + "/checkpoints");
  const auto paths = render_plots(fc, k, count, out_dir + "/plots");
  std::cout << "plot: wrote " << paths.size() << " images -> " << out_dir << "/plots\n";
  return 0;
}

int cmd_inspect(const RunConfig & cfg, const std::string & out_dir, const std::string & scene_id)
{
  const Dataset data = open_dataset(cfg);
  const envsim::SceneRecord * rec = nullptr;
  for (const auto & r : data.records()) {
    if (r.scene_id == scene_id) {
      rec = &r;
      break;
    }
  }
  if (rec == nullptr) {
    throw DataError("inspect: unknown scene_id " + scene_id);
  }

  const SceneEncoder enc(cfg, data);
  const auto ex = enc.macro_example(*rec);
  heatmap::HeatmapStack stack;
  stack.channels.push_back(ex.x_in.to_raster(0));
  stack.roles.push_back(heatmap::ChannelRole::kSemanticMap);
  stack.channels.push_back(ex.x_in.to_raster(1));
  stack.roles.push_back(heatmap::ChannelRole::kPastTraj);
  stack.channels.push_back(ex.lg_target.to_raster(0));
  stack.roles.push_back(heatmap::ChannelRole::kLongGoal);
  for (int c = 0; c < ex.sg_target.c; ++c) {
    stack.channels.push_back(ex.sg_target.to_raster(c));
    const bool refined_goal = !cfg.ablation.without_micro && c == ex.sg_target.c - 1;
    stack.roles.push_back(refined_goal ? heatmap::ChannelRole::kLongGoal
                                       : heatmap::ChannelRole::kShortGoal);
  }
  stack.validate(true);

  const std::string dir = out_dir + "/inspect";
  std::filesystem::create_directories(dir);
  const std::string prefix = dir + "/" + scene_id;
  heatmap::dump_stack(stack, prefix);
  std::cout << "inspect: " << scene_id << " env=" << rec->env_id << " split=" << rec->split
            << " channels=" << stack.channels.size() << " -> " << prefix << "_c*.pgm\n";
  return 0;
}

int cmd_stats(const RunConfig & cfg, const std::string & out_dir, const std::string & metric_in,
              const std::string & rope_in, const std::vector<std::string> & csv_paths)
{
  const std::string metric = canonical_metric(metric_in);
  const int column = metric_column(metric);
  const bool lower_is_better = metric != "ecfl";

  std::vector<std::map<std::string, double>> by_method;
  by_method.reserve(csv_paths.size());
  for (const auto & path : csv_paths) {
    by_method.push_back(read_metric_csv(path, column));
  }
  for (std::size_t i = 1; i < by_method.size(); ++i) {
    if (by_method[i].size() != by_method[0].size()) {
      throw DataError("stats: scene sets differ between " + csv_paths[0] + " and " +
                      csv_paths[i]);
    }
    for (const auto & [scene, _] : by_method[0]) {
      if (by_method[i].count(scene) == 0) {
        throw DataError("stats: scene " + scene + " missing from " + csv_paths[i]);
      }
    }
  }

  stats::RankTable rt;
  rt.methods = csv_paths;
  for (const auto & [scene, _] : by_method[0]) {
    rt.datasets.push_back(scene);
    std::vector<double> row;
    row.reserve(by_method.size());
    for (const auto & m : by_method) {
      row.push_back(m.at(scene));
    }
    rt.ranks.push_back(stats::midranks(row, lower_is_better));
  }
  rt.validate();

  const int k = static_cast<int>(csv_paths.size());
  const int n = static_cast<int>(rt.datasets.size());

  nlohmann::ordered_json j;
  j["metric"] = metric;
  j["units"] = cfg.dataset.units;
  j["lower_is_better"] = lower_is_better;
  j["methods"] = csv_paths;
  j["n_datasets"] = n;
  j["average_ranks"] = stats::average_ranks(rt);

  try {
    const auto fr = stats::friedman(rt);
    j["friedman"] = {{"chi2", fr.chi2},
                     {"f_stat", fr.f_stat},
                     {"dof1", fr.dof1},
                     {"dof2", fr.dof2}};
  } catch (const DomainError &) {
    // Unanimous rankings drive the F correction's denominator to zero; the
    // chi-square is still reportable.
    j["friedman"] = {{"chi2", stats::friedman_chi2(rt)}, {"degenerate", true}};
  }
  j["nemenyi_cd"] = stats::nemenyi_cd(k, n, stats::nemenyi_q05(k));

  if (k == 2) {
    double rope = 0.0;
    if (rope_in == "auto") {
      rope = stats::rope_for(metric, cfg.dataset.units);
    } else {
      try {
        std::size_t used = 0;
        rope = std::stod(rope_in, &used);
        if (used != rope_in.size()) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception &) {
        throw DataError("stats: --rope expects a number or 'auto'");
      }
      if (rope < 0.0) {
        throw DataError("stats: rope must be non-negative");
      }
    }
    stats::PairedScores ps;
    ps.method_a = csv_paths[0];
    ps.method_b = csv_paths[1];
    ps.rope = rope;
    for (const auto & [scene, va] : by_method[0]) {
      const double vb = by_method[1].at(scene);
      ps.diffs.push_back(lower_is_better ? vb - va : va - vb);
    }
    Rng rng = Rng::derive(cfg.eval.seed, "stats");
    const auto post = stats::bayesian_signed_rank(ps, 0.5, 30000, rng);
    j["bayesian"] = {{"rope", rope},
                     {"p_a_wins", post.p_a_wins},
                     {"p_rope", post.p_rope},
                     {"p_b_wins", post.p_b_wins}};
  }

  const std::string doc = j.dump(2) + "\n";
  std::cout << doc;
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/stats_" + metric + ".json", std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("stats: cannot open output file under " + out_dir);
  }
  out << doc;
  return 0;
}

}  // namespace

int run_cli(int argc, const char * const * argv)
{
  CLI::App app{"Multi-scale environment-aware trajectory forecasting"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "config file (flat TOML grammar)");
  app.add_option("--out", out_dir, "output directory for run artifacts");
  auto * seed_opt =
    app.add_option("--seed", seed, "override the seed of the subcommand's stage");

  auto * sub_simulate = app.add_subcommand("simulate", "build the synthetic dataset");

  std::string stage = "all";
  std::vector<std::string> ablations;
  auto * sub_train = app.add_subcommand("train", "train the stage cascade");
  sub_train->add_option("--stage", stage, "pretrain|lg|sg|micro|all")
    ->check(CLI::IsMember({"pretrain", "lg", "sg", "micro", "all"}));
  sub_train->add_option("--ablation", ablations, "ablation flag (repeatable)")
    ->check(CLI::IsMember({"without_sg_net", "without_micro", "without_ll_prior"}));

  std::vector<int> k_override;
  auto * sub_evaluate = app.add_subcommand("evaluate", "score the eval split");
  sub_evaluate->add_option("--k", k_override, "rollouts per scene (repeatable)")
    ->check(CLI::PositiveNumber);
  sub_evaluate->add_option("--ablation", ablations, "ablation flag (repeatable)")
    ->check(CLI::IsMember({"without_sg_net", "without_micro", "without_ll_prior"}));

  int plot_k = 0;
  int plot_count = 8;
  auto * sub_plot = app.add_subcommand("plot", "render forecast overlay images");
  sub_plot->add_option("--k", plot_k, "rollouts per scene (default: first eval K)")
    ->check(CLI::PositiveNumber);
  sub_plot->add_option("--count", plot_count, "number of scenes")->check(CLI::PositiveNumber);
  sub_plot->add_option("--ablation", ablations, "ablation flag (repeatable)")
    ->check(CLI::IsMember({"without_sg_net", "without_micro", "without_ll_prior"}));

  std::string metric = "min_ade";
  std::string rope = "auto";
  std::vector<std::string> csv_paths;
  auto * sub_stats = app.add_subcommand("stats", "significance tests over metric CSVs");
  sub_stats->add_option("--metric", metric, "ade|fde|kde_nll|ecfl");
  sub_stats->add_option("--rope", rope, "ROPE half width or 'auto'");
  sub_stats->add_option("csv", csv_paths, "one metric CSV per method")
    ->required()
    ->expected(2, -1);

  std::string scene_id;
  auto * sub_inspect = app.add_subcommand("inspect", "dump a scene's heatmap stack");
  sub_inspect->add_option("scene", scene_id, "scene_id to dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = load_run_config(config_path);
    }
    apply_ablations(cfg, ablations);
    if (seed_opt->count() > 0) {
      if (sub_simulate->parsed()) {
        cfg.simulate.seed = seed;
      } else if (sub_train->parsed()) {
        cfg.train.seed = seed;
      } else {
        cfg.eval.seed = seed;
      }
    }
    if (!k_override.empty()) {
      cfg.eval.k_list = k_override;
    }
    cfg.validate();

    if (sub_simulate->parsed()) {
      return cmd_simulate(cfg);
    }
    if (sub_train->parsed()) {
      return cmd_train(cfg, out_dir, stage);
    }
    if (sub_evaluate->parsed()) {
      return cmd_evaluate(cfg, out_dir);
    }
    if (sub_plot->parsed()) {
      const int k = plot_k > 0 ? plot_k : cfg.eval.k_list.front();
      return cmd_plot(cfg, out_dir, k, plot_count);
    }
    if (sub_stats->parsed()) {
      return cmd_stats(cfg, out_dir, metric, rope, csv_paths);
    }
    return cmd_inspect(cfg, out_dir, scene_id);
  } catch (const DataError & e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace trajcast::pipeline
