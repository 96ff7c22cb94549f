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

// Release gate: eleven numbered checks, one pass/fail line each. Every
// tolerance is pinned here in code. Exit 0 only when every executed check
// passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "trajcast/core/errors.hpp"
#include "trajcast/core/vec2.hpp"
#include "trajcast/envsim/dataset.hpp"
#include "trajcast/heatmap/heatmap.hpp"
#include "trajcast/raster/semantic_grid.hpp"
#include "trajcast/macro/losses.hpp"
#include "trajcast/metrics/metrics.hpp"
#include "trajcast/nn/gaussian.hpp"
#include "trajcast/pipeline/cli.hpp"
#include "trajcast/pipeline/evaluate.hpp"
#include "trajcast/pipeline/trainer.hpp"
#include "trajcast/stats/stats.hpp"

namespace fs = std::filesystem;
using namespace trajcast;

namespace
{

std::string g_out = "acceptance_out";

struct Outcome
{
  bool pass{false};
  std::string detail;
};

std::string fmt(const char * f, ...)
{
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------- C1 / C2

Outcome c1_nemenyi()
{
  const double cd = stats::nemenyi_cd(4, 24, 2.569);
  const double err = std::abs(cd - 0.957);
  return {err <= 5e-4, fmt("cd=%.6f err=%.1e (tol 5e-4)", cd, err)};
}

Outcome c2_friedman_band()
{
  const auto fr = stats::friedman_from_mean_ranks({1.33, 2.33, 2.92, 3.42}, 24);
  const bool pass = fr.f_stat >= 20.8 && fr.f_stat <= 22.2;
  return {pass, fmt("F=%.4f (band [20.8, 22.2], chi2=%.4f)", fr.f_stat, fr.chi2)};
}

// ---------------------------------------------------------------- C3

raster::SemanticGrid make_toy_grid(Rng & rng)
{
  raster::SemanticGrid grid;
  grid.cells = GridU8(32, 32, 0);
  for (int i = 0; i < 32; ++i) {
    grid.cells.at(0, i) = 1;
    grid.cells.at(31, i) = 1;
    grid.cells.at(i, 0) = 1;
    grid.cells.at(i, 31) = 1;
  }
  for (int n = 0; n < 60; ++n) {
    grid.cells.at(static_cast<int>(rng.uniform_int(1, 30)),
                  static_cast<int>(rng.uniform_int(1, 30))) = 1;
  }
  grid.class_values = {{0, 0.0}, {1, 1.0}};
  grid.navigable_classes = {0};
  grid.pad_class = 1;
  grid.world_to_px = raster::Homography::scale(4.0);
  grid.validate();
  return grid;
}

double oracle_min_ade(const metrics::ForecastSet & fs)
{
  double best = std::numeric_limits<double>::infinity();
  for (const auto & sample : fs.samples) {
    double sum = 0.0;
    for (std::size_t t = 0; t < sample.size(); ++t) {
      sum += std::hypot(sample[t].x - fs.gt_future[t].x, sample[t].y - fs.gt_future[t].y);
    }
    best = std::min(best, sum / static_cast<double>(sample.size()));
  }
  return best;
}

double oracle_min_fde(const metrics::ForecastSet & fs)
{
  double best = std::numeric_limits<double>::infinity();
  for (const auto & sample : fs.samples) {
    best = std::min(best, std::hypot(sample.back().x - fs.gt_future.back().x,
                                     sample.back().y - fs.gt_future.back().y));
  }
  return best;
}

double oracle_ecfl(const metrics::ForecastSet & fs, const raster::SemanticGrid & grid)
{
  int clean = 0;
  for (const auto & sample : fs.samples) {
    bool ok = true;
    for (const auto & pt : sample) {
      const int x = static_cast<int>(round_half_away(pt.x * 4.0));
      const int y = static_cast<int>(round_half_away(pt.y * 4.0));
      if (x < 0 || x >= 32 || y < 0 || y >= 32 || grid.cells.at(y, x) != 0) {
        ok = false;
        break;
      }
    }
    clean += ok ? 1 : 0;
  }
  return 100.0 * clean / static_cast<double>(fs.samples.size());
}

Outcome c3_metric_oracles()
{
  Rng rng = Rng::derive(1234, "acceptance-c3");
  const raster::SemanticGrid grid = make_toy_grid(rng);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = static_cast<int>(rng.uniform_int(1, 8));
    const int t_f = static_cast<int>(rng.uniform_int(1, 12));
    metrics::ForecastSet fs;
    fs.scene_id = "t" + std::to_string(trial);
    const auto rand_traj = [&] {
      std::vector<Vec2> tr;
      for (int t = 0; t < t_f; ++t) {
        tr.push_back({rng.uniform(-0.5, 8.5), rng.uniform(-0.5, 8.5)});
      }
      return tr;
    };
    fs.gt_future = rand_traj();
    for (int i = 0; i < k; ++i) {
      fs.samples.push_back(rand_traj());
    }
    if (metrics::min_ade(fs) != oracle_min_ade(fs)) {
      return {false, fmt("min_ade mismatch on trial %d", trial)};
    }
    if (metrics::min_fde(fs) != oracle_min_fde(fs)) {
      return {false, fmt("min_fde mismatch on trial %d", trial)};
    }
    if (metrics::ecfl(fs, grid) != oracle_ecfl(fs, grid)) {
      return {false, fmt("ecfl mismatch on trial %d", trial)};
    }
  }

  metrics::ForecastSet two;
  two.scene_id = "pair";
  two.samples = {{{-1.0, 0.0}}, {{1.0, 0.0}}};
  two.gt_future = {{0.0, 0.0}};
  metrics::KdeConfig kc;
  kc.fixed_bandwidth = 1.0;
  const double nll = metrics::kde_nll(two, kc);
  const double err = std::abs(nll - 2.3379);
  if (err > 1e-4) {
    return {false, fmt("kde_nll=%.6f err=%.1e (tol 1e-4)", nll, err)};
  }
  return {true, fmt("200 sets exact, kde_nll=%.6f err=%.1e", nll, err)};
}

// ---------------------------------------------------------------- C4

Outcome c4_focal()
{
  const double half = 0.5;
  const double one = 1.0;
  const double zero = 0.0;
  const double l1 = macro::focal_loss(&half, &one, 1);
  const double l2 = macro::focal_loss(&half, &zero, 1);
  if (std::abs(l1 - 0.04332) > 1e-5 || std::abs(l2 - 0.12996) > 1e-5) {
    return {false, fmt("hand cases: %.7f vs 0.04332, %.7f vs 0.12996", l1, l2)};
  }

  Rng rng = Rng::derive(77, "acceptance-c4");
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t n = 64;  // 8x8
    std::vector<double> pred(n);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng.uniform(0.05, 0.95);
      target[i] = rng.uniform01();
    }
    std::vector<double> analytic(n, 0.0);
    macro::focal_loss_backward(pred.data(), target.data(), n, 1.0, analytic.data());
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1e-6;
      const double keep = pred[i];
      pred[i] = keep + h;
      const double lp = macro::focal_loss(pred.data(), target.data(), n);
      pred[i] = keep - h;
      const double lm = macro::focal_loss(pred.data(), target.data(), n);
      pred[i] = keep;
      const double numeric = (lp - lm) / (2.0 * h);
      const double rel = std::abs(analytic[i] - numeric) / std::max(1e-3, std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return {worst < 1e-4,
          fmt("hand cases ok (%.7f, %.7f), gradcheck worst rel=%.2e", l1, l2, worst)};
}

// ---------------------------------------------------------------- C5

Outcome c5_kl_monte_carlo()
{
  Rng rng = Rng::derive(99, "acceptance-c5");
  const int n = 100000;
  double worst_z = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = static_cast<int>(rng.uniform_int(1, 8));
    nn::DiagonalGaussian q;
    nn::DiagonalGaussian p;
    q.mean = nn::Vec(dim);
    q.log_std = nn::Vec(dim);
    p.mean = nn::Vec(dim);
    p.log_std = nn::Vec(dim);
    for (int d = 0; d < dim; ++d) {
      q.mean(d) = rng.normal(0.0, 1.5);
      q.log_std(d) = rng.uniform(-1.0, 0.7);
      p.mean(d) = rng.normal(0.0, 1.5);
      p.log_std(d) = rng.uniform(-1.0, 0.7);
    }
    const double analytic = nn::kl_per_dim(q, p).sum();

    double sum = 0.0;
    double sum2 = 0.0;
    nn::Vec eps(dim);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) {
        eps(d) = rng.normal();
      }
      const nn::Vec x = q.sample(eps);
      const double term = q.log_prob(x) - p.log_prob(x);
      sum += term;
      sum2 += term * term;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    const double se = std::sqrt(var / n);
    const double z = std::abs(analytic - mean) / std::max(se, 1e-300);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) {
      return {false, fmt("trial %d: analytic=%.5f mc=%.5f z=%.2f", trial, analytic, mean, z)};
    }
  }
  return {true, fmt("50 trials, worst |z|=%.2f (limit 3)", worst_z)};
}

// ---------------------------------------------------------------- C6

Outcome c6_codec()
{
  Rng rng = Rng::derive(4242, "acceptance-c6");
  for (const int size : {256, 160}) {
    for (int i = 0; i < 1000; ++i) {
      const auto x = static_cast<double>(rng.uniform_int(1, size - 2));
      const auto y = static_cast<double>(rng.uniform_int(1, size - 2));
      const Raster hm = heatmap::encode_goal({x, y}, size, size, 4.0);
      const Vec2 peak = heatmap::decode_peak(hm);
      if (peak.x != x || peak.y != y) {
        return {false, fmt("size %d: (%g,%g) decoded to (%g,%g)", size, x, y, peak.x, peak.y)};
      }
    }
  }
  return {true, "identity on 1000 px at 256^2 and 160^2"};
}

// ------------------------------------------------------- desk dataset (C7/C8)

std::string desk_data_dir()
{
  const std::string dir = g_out + "/desk_data";
  if (!fs::exists(dir + "/scenes.jsonl")) {
    envsim::DatasetSpec spec;
    spec.seed = 7;
    spec.workers = 1;
    const auto summary = envsim::build_dataset(spec, dir);
    std::printf("  [desk dataset: %d envs, %d records -> %s]\n", summary.env_count,
                summary.record_count, dir.c_str());
  }
  return dir;
}

pipeline::RunConfig desk_config()
{
  pipeline::RunConfig cfg;  // profile defaults are the desk profile
  cfg.dataset.data_dir = desk_data_dir();
  return cfg;
}

Outcome c7_simulator_safety()
{
  const auto cfg = desk_config();
  const pipeline::Dataset data =
    pipeline::load_dataset(cfg.dataset.data_dir, cfg.dataset.t_p + cfg.dataset.t_f);

  // 11 envs x 50 paths, each path yielding one window or more.
  const std::size_t expected = static_cast<std::size_t>(11) * 50;
  if (data.size() < expected) {
    return {false, fmt("expected at least %zu records, found %zu", expected, data.size())};
  }

  double step_sum = 0.0;
  std::size_t step_count = 0;
  for (const auto & rec : data.records()) {
    const auto & grid = data.grid(rec.env_id);
    metrics::ForecastSet fs;
    fs.scene_id = rec.scene_id;
    fs.gt_future.assign(rec.points.begin() + cfg.dataset.t_p, rec.points.end());
    fs.samples = {fs.gt_future};
    const double e = metrics::ecfl(fs, grid);
    if (e != 100.0) {
      return {false, fmt("scene %s: ecfl=%.3f != 100", rec.scene_id.c_str(), e)};
    }
    const auto px = raster::world_to_pixel(grid.world_to_px, rec.points);
    for (std::size_t t = 1; t < px.size(); ++t) {
      step_sum += (px[t] - px[t - 1]).norm();
      ++step_count;
    }
  }
  const double mean_step = step_sum / static_cast<double>(step_count);
  const bool pass = mean_step >= 4.0 && mean_step <= 12.0;
  return {pass, fmt("ecfl=100 on %zu scenes, mean step %.2f px (band [4, 12])",
                    data.size(), mean_step)};
}

// ---------------------------------------------------------------- C8

std::vector<nlohmann::json> read_jsonl(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("acceptance: cannot open " + path);
  }
  std::vector<nlohmann::json> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      lines.push_back(nlohmann::json::parse(line));
    }
  }
  return lines;
}

Outcome c8_training_smoke()
{
  const auto cfg = desk_config();
  const pipeline::Dataset data =
    pipeline::load_dataset(cfg.dataset.data_dir, cfg.dataset.t_p + cfg.dataset.t_f);
  const std::string run_dir = g_out + "/desk_run";
  pipeline::Trainer trainer(cfg, data, run_dir);

  const auto stage_seconds = [&](const std::string & stage) {
    const auto t0 = std::chrono::steady_clock::now();
    trainer.run(stage);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double t_pre = stage_seconds("pretrain");
  const double t_lg = stage_seconds("lg");
  const double t_micro = stage_seconds("micro");

  const auto pre = read_jsonl(trainer.log_path("pretrain"));
  const auto lg = read_jsonl(trainer.log_path("lg"));
  const auto micro = read_jsonl(trainer.log_path("micro"));
  if (pre.size() != 10 || lg.size() != 12 || micro.size() != 30) {
    return {false, fmt("unexpected epoch counts %zu/%zu/%zu", pre.size(), lg.size(),
                       micro.size())};
  }

  const double pre0 = pre.front().at("recon").get<double>();
  const double pre9 = pre.back().at("recon").get<double>();
  const bool a = pre9 <= 0.7 * pre0;

  const double lg_start = lg.front().at("total").get<double>();
  const double lg_end = lg.back().at("total").get<double>();
  const bool b = lg_end < lg_start;

  // 10 latent dims with a 0.08 free-bits floor each.
  bool c = true;
  double worst_kl = std::numeric_limits<double>::infinity();
  for (const auto & row : lg) {
    const double klc = row.at("kl_clamped").get<double>();
    worst_kl = std::min(worst_kl, klc);
    c = c && klc >= 10 * 0.08 - 1e-6;
  }

  const double mi0 = micro.front().at("total").get<double>();
  const double mi29 = micro.back().at("total").get<double>();
  const bool d = mi29 <= 0.8 * mi0;

  return {a && b && c && d,
          fmt("(a)%s pre %.4f->%.4f (b)%s lg %.4f->%.4f (c)%s minKL=%.4f (d)%s micro "
              "%.4f->%.4f [%.0fs/%.0fs/%.0fs]",
              a ? "ok" : "FAIL", pre0, pre9, b ? "ok" : "FAIL", lg_start, lg_end,
              c ? "ok" : "FAIL", worst_kl, d ? "ok" : "FAIL", mi0, mi29, t_pre, t_lg, t_micro)};
}

// ---------------------------------------------------------------- C9

int cli(const std::vector<std::string> & args)
{
  std::vector<const char *> argv;
  argv.push_back("trajcast");
  for (const auto & a : args) {
    argv.push_back(a.c_str());
  }
  return pipeline::run_cli(static_cast<int>(argv.size()), argv.data());
}

// Small end-to-end profile: full cascade, trimmed sizes. Determinism does
// not depend on scale.
pipeline::RunConfig mini_config(const std::string & data_dir)
{
  pipeline::RunConfig cfg;
  cfg.dataset.data_dir = data_dir;
  cfg.dataset.raster_size = 32;
  cfg.simulate.train_envs = 2;
  cfg.simulate.val_envs = 1;
  cfg.simulate.test_envs = 1;
  cfg.simulate.scenes_per_env = 6;
  cfg.model.lg_encoder_channels = {8, 8, 16, 16, 16};
  cfg.model.prior_channels = {8, 8};
  cfg.model.sg_extra_channels = 16;
  cfg.train.batch_size = 8;
  cfg.train.pretrain_epochs = 2;
  cfg.train.anneal_epochs = 2;
  cfg.train.lg_epochs = 2;
  cfg.train.sg_epochs = 1;
  cfg.train.micro_epochs = 2;
  cfg.eval.k_list = {5};
  return cfg;
}

void write_config(const pipeline::RunConfig & cfg, const std::string & path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << pipeline::canonical_config(cfg);
}

std::string slurp(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("acceptance: cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c9_determinism()
{
  std::vector<std::string> csvs;
  for (const std::string tag : {"a", "b"}) {
    const std::string dir = g_out + "/c9_" + tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cfg_path = dir + "/run.toml";
    write_config(mini_config(dir + "/data"), cfg_path);
    if (cli({"simulate", "--config", cfg_path}) != 0) {
      return {false, "simulate failed in run " + tag};
    }
    if (cli({"train", "--stage", "all", "--config", cfg_path, "--out", dir}) != 0) {
      return {false, "train failed in run " + tag};
    }
    if (cli({"evaluate", "--k", "5", "--config", cfg_path, "--out", dir}) != 0) {
      return {false, "evaluate failed in run " + tag};
    }
    csvs.push_back(slurp(dir + "/metrics_k5.csv"));
  }
  if (csvs[0] != csvs[1]) {
    return {false, "metric CSVs differ between identically seeded runs"};
  }
  const std::size_t scenes = std::count(csvs[0].begin(), csvs[0].end(), '\n') - 2;
  return {true, fmt("CSVs byte-identical (%zu scene rows)", scenes)};
}

// ---------------------------------------------------------------- C10

Outcome c10_ablation_plumbing()
{
  // Heatmap-maxima mode: every emitted point must sit on a model pixel center.
  const std::string dir_a = g_out + "/c10_wm";
  fs::remove_all(dir_a);
  fs::create_directories(dir_a);
  auto cfg_a = mini_config(dir_a + "/data");
  cfg_a.ablation.without_micro = true;
  const std::string cfg_a_path = dir_a + "/run.toml";
  write_config(cfg_a, cfg_a_path);
  if (cli({"simulate", "--config", cfg_a_path}) != 0) {
    return {false, "simulate failed (without_micro run)"};
  }
  if (cli({"train", "--stage", "all", "--config", cfg_a_path, "--out", dir_a}) != 0) {
    return {false, "train failed (without_micro run)"};
  }
  {
    const pipeline::Dataset data =
      pipeline::load_dataset(cfg_a.dataset.data_dir, cfg_a.dataset.t_p + cfg_a.dataset.t_f);
    const pipeline::Forecaster fc(cfg_a, data, dir_a + "/checkpoints");
    const auto idx = data.split_indices("test");
    if (idx.empty()) {
      return {false, "without_micro run has no test scenes"};
    }
    for (const std::size_t i : idx) {
      const auto & rec = data.records()[i];
      Rng rng = Rng::derive(cfg_a.eval.seed, rec.scene_id);
      const auto sf = fc.forecast(rec, 3, rng);
      const auto h = fc.encoder().model_h(rec.env_id);
      for (const auto & sample : sf.set.samples) {
        for (const auto & pt : sample) {
          const Vec2 px = raster::world_to_pixel(h, pt);
          if (std::abs(px.x - std::round(px.x)) > 1e-6 ||
              std::abs(px.y - std::round(px.y)) > 1e-6) {
            return {false, fmt("scene %s: point maps to (%.6f, %.6f), not a pixel center",
                               rec.scene_id.c_str(), px.x, px.y)};
          }
        }
      }
    }
  }

  // Prior-likelihood ablation: the loss log must carry exactly one
  // reconstruction term per epoch.
  const std::string dir_b = g_out + "/c10_wp";
  fs::remove_all(dir_b);
  fs::create_directories(dir_b);
  auto cfg_b = mini_config(dir_b + "/data");
  cfg_b.ablation.without_ll_prior = true;
  const std::string cfg_b_path = dir_b + "/run.toml";
  write_config(cfg_b, cfg_b_path);
  if (cli({"simulate", "--config", cfg_b_path}) != 0) {
    return {false, "simulate failed (without_ll_prior run)"};
  }
  if (cli({"train", "--stage", "all", "--config", cfg_b_path, "--out", dir_b}) != 0) {
    return {false, "train failed (without_ll_prior run)"};
  }
  const auto rows = read_jsonl(dir_b + "/logs/micro.jsonl");
  if (rows.empty()) {
    return {false, "without_ll_prior run produced no micro log"};
  }
  for (const auto & row : rows) {
    int recon_terms = 0;
    for (const auto & [key, _] : row.items()) {
      if (key.rfind("recon", 0) == 0) {
        ++recon_terms;
      }
    }
    if (recon_terms != 1) {
      return {false, fmt("micro log row has %d reconstruction terms, want 1", recon_terms)};
    }
  }
  return {true, "pixel-center property holds; micro log has exactly one recon term"};
}

// ---------------------------------------------------------------- C11

Outcome c11_bayesian_sanity()
{
  stats::PairedScores same;
  same.method_a = "a";
  same.method_b = "b";
  same.diffs.assign(20, 0.0);
  same.rope = 0.1;
  Rng rng1 = Rng::derive(5, "acceptance-c11-same");
  const auto post_same = stats::bayesian_signed_rank(same, 0.5, 30000, rng1);

  stats::PairedScores dom;
  dom.method_a = "a";
  dom.method_b = "b";
  dom.diffs.assign(20, 0.5);
  dom.rope = 0.05;
  Rng rng2 = Rng::derive(5, "acceptance-c11-dom");
  const auto post_dom = stats::bayesian_signed_rank(dom, 0.5, 30000, rng2);

  const double sum1 = post_same.p_a_wins + post_same.p_rope + post_same.p_b_wins;
  const double sum2 = post_dom.p_a_wins + post_dom.p_rope + post_dom.p_b_wins;
  const bool pass = post_same.p_rope >= 0.99 && post_dom.p_a_wins >= 0.99 &&
                    std::abs(sum1 - 1.0) <= 1e-9 && std::abs(sum2 - 1.0) <= 1e-9;
  return {pass, fmt("identical: p_rope=%.4f; dominant: p_a=%.4f; sums-1: %.1e/%.1e",
                    post_same.p_rope, post_dom.p_a_wins, sum1 - 1.0, sum2 - 1.0)};
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default: all)")
    ->check(CLI::Range(1, 11));
  app.add_option("--out", g_out, "artifact directory");
  CLI11_PARSE(app, argc, argv);

  struct Check
  {
    int id;
    const char * name;
    std::function<Outcome()> fn;
  };
  const std::vector<Check> checks = {
    {1, "nemenyi-cd", c1_nemenyi},
    {2, "friedman-band", c2_friedman_band},
    {3, "metric-oracles", c3_metric_oracles},
    {4, "focal-loss", c4_focal},
    {5, "gaussian-kl-mc", c5_kl_monte_carlo},
    {6, "heatmap-codec", c6_codec},
    {7, "simulator-safety", c7_simulator_safety},
    {8, "training-smoke", c8_training_smoke},
    {9, "end-to-end-determinism", c9_determinism},
    {10, "ablation-plumbing", c10_ablation_plumbing},
    {11, "bayesian-sanity", c11_bayesian_sanity},
  };

  fs::create_directories(g_out);
  bool all_pass = true;
  int ran = 0;
  for (const auto & check : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), check.id) == only.end()) {
      continue;
    }
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check.fn();
    } catch (const std::exception & e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("C%d %s: %s (%s) [%.1fs]\n", check.id, check.name,
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  std::printf("%d criteria run: %s\n", ran, all_pass ? "ALL PASS" : "FAILURES PRESENT");
  return all_pass ? 0 : 1;
}
