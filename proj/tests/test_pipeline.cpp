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

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/image_io.hpp"
#include "trajcast/envsim/dataset.hpp"
#include "trajcast/pipeline/cli.hpp"
#include "trajcast/pipeline/config.hpp"
#include "trajcast/pipeline/dataset_io.hpp"
#include "trajcast/pipeline/evaluate.hpp"
#include "trajcast/pipeline/trainer.hpp"

namespace fs = std::filesystem;
using namespace trajcast;

namespace
{

std::string slurp(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Tiny simulated dataset shared across the heavy cases, built on first use.
const std::string & tiny_data_dir()
{
  static const std::string dir = [] {
    const auto base = fs::temp_directory_path() / "trajcast_pipeline_data";
    const std::string d = base.string();
    if (!fs::exists(d + "/scenes.jsonl")) {
      envsim::DatasetSpec spec;
      spec.seed = 5;
      spec.train_envs = 1;
      spec.val_envs = 1;
      spec.test_envs = 1;
      spec.scenes_per_env = 2;
      spec.env.grid_h = 160;
      spec.env.grid_w = 160;
      spec.env.room_count_min = 4;
      spec.env.room_count_max = 6;
      spec.force.desired_speed = 0.8;
      spec.sim.d_min_frac = 0.35;
      spec.sim.max_retries = 60;
      envsim::build_dataset(spec, d);
    }
    return d;
  }();
  return dir;
}

// Narrow nets and single epochs; enough to exercise every stage quickly.
pipeline::RunConfig tiny_cfg()
{
  pipeline::RunConfig cfg;
  cfg.dataset.data_dir = tiny_data_dir();
  cfg.dataset.raster_size = 32;
  cfg.model.lg_encoder_channels = {4, 4, 8, 8, 8};
  cfg.model.prior_channels = {4, 4};
  cfg.model.sg_extra_channels = 8;
  cfg.train.batch_size = 4;
  cfg.train.pretrain_epochs = 1;
  cfg.train.anneal_epochs = 1;
  cfg.train.lg_epochs = 1;
  cfg.train.sg_epochs = 1;
  cfg.train.micro_epochs = 1;
  cfg.eval.k_list = {2};
  cfg.validate();
  return cfg;
}

int cli(const std::vector<std::string> & args)
{
  std::vector<const char *> argv;
  argv.push_back("trajcast");
  for (const auto & a : args) {
    argv.push_back(a.c_str());
  }
  return pipeline::run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("pipeline")
{
  TEST_CASE("defaults validate and the canonical form round-trips")
  {
    pipeline::RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    const std::string text = pipeline::canonical_config(cfg);
    const auto file = pipeline::ConfigFile::parse_string(text, "canon");
    const pipeline::RunConfig back = pipeline::run_config_from(file);
    CHECK(pipeline::canonical_config(back) == text);
    CHECK(pipeline::config_hash(back) == pipeline::config_hash(cfg));

    // Section order in the file must not matter.
    const std::string reordered =
      "[train]\nbatch_size = 16\n[dataset]\nraster_size = 32\n";
    const std::string forward =
      "[dataset]\nraster_size = 32\n[train]\nbatch_size = 16\n";
    const auto a = pipeline::run_config_from(pipeline::ConfigFile::parse_string(reordered, "a"));
    const auto b = pipeline::run_config_from(pipeline::ConfigFile::parse_string(forward, "b"));
    CHECK(pipeline::config_hash(a) == pipeline::config_hash(b));
  }

  TEST_CASE("config hash covers training sections only")
  {
    pipeline::RunConfig cfg;
    const auto base = pipeline::config_hash(cfg);

    cfg.eval.seed = 999;
    cfg.eval.k_list = {1, 2, 3};
    cfg.eval.workers = 4;
    cfg.simulate.seed = 123;
    CHECK(pipeline::config_hash(cfg) == base);

    pipeline::RunConfig model_change;
    model_change.model.beta = 1.0;
    CHECK(pipeline::config_hash(model_change) != base);

    pipeline::RunConfig ablation_change;
    ablation_change.ablation.without_micro = true;
    CHECK(pipeline::config_hash(ablation_change) != base);

    pipeline::RunConfig data_change;
    data_change.dataset.raster_size = 32;
    CHECK(pipeline::config_hash(data_change) != base);
  }

  TEST_CASE("parser reports origin and line on malformed input")
  {
    const auto expect_msg = [](const std::string & text, const std::string & needle) {
      try {
        pipeline::ConfigFile::parse_string(text, "cfg.toml");
        FAIL_CHECK("expected DataError for: " << text);
      } catch (const DataError & e) {
        const std::string msg = e.what();
        CHECK(msg.find("cfg.toml") != std::string::npos);
        CHECK(msg.find(needle) != std::string::npos);
      }
    };
    expect_msg("[dataset]\nt_p 8\n", ":2:");
    expect_msg("t_p = 8\n", ":1:");           // key before any section
    expect_msg("[dataset\nt_p = 8\n", ":1:");  // unterminated header
    expect_msg("[dataset]\nx = [1, \"a\"]\n", ":2:");

    CHECK_THROWS_AS(pipeline::load_run_config("/nonexistent/cfg.toml"), DataError);
  }

  TEST_CASE("unknown keys and wrong value kinds are rejected")
  {
    const auto cfg_of = [](const std::string & text) {
      return pipeline::run_config_from(pipeline::ConfigFile::parse_string(text, "t"));
    };
    CHECK_THROWS_AS(cfg_of("[dataset]\nbogus = 1\n"), DataError);
    CHECK_THROWS_AS(cfg_of("[nosuch]\nt_p = 1\n"), DataError);
    CHECK_THROWS_AS(cfg_of("[dataset]\nt_p = \"eight\"\n"), DataError);
    CHECK_THROWS_AS(cfg_of("[train]\nseed = -3\n"), DataError);

    // Integers are fine where floats are expected.
    const auto ok = cfg_of("[model]\nbeta = 2\n");
    CHECK(ok.model.beta == doctest::Approx(2.0));
  }

  TEST_CASE("validation rejects broken invariants")
  {
    const auto broken = [](auto mutate) {
      pipeline::RunConfig cfg;
      mutate(cfg);
      return cfg;
    };
    CHECK_THROWS_AS(
      broken([](auto & c) { c.dataset.sg_indices = {8, 4}; }).validate(), DataError);
    CHECK_THROWS_AS(
      broken([](auto & c) { c.dataset.sg_indices = {4, 12}; }).validate(), DataError);
    CHECK_THROWS_AS(broken([](auto & c) { c.dataset.t_f = 0; }).validate(), DataError);
    CHECK_THROWS_AS(
      broken([](auto & c) { c.dataset.raster_size = 60; }).validate(), DataError);
    CHECK_THROWS_AS(
      broken([](auto & c) { c.model.sg_input_mode = "banana"; }).validate(), DataError);
    CHECK_THROWS_AS(
      broken([](auto & c) { c.model.lg_encoder_channels = {16}; }).validate(), DataError);
    CHECK_THROWS_AS(broken([](auto & c) { c.eval.k_list = {0}; }).validate(), DataError);
    CHECK_THROWS_AS(broken([](auto & c) { c.train.batch_size = 0; }).validate(), DataError);
  }

  TEST_CASE("dataset loads windows, splits and grids")
  {
    const auto cfg = tiny_cfg();
    const auto data = pipeline::load_dataset(cfg.dataset.data_dir, 20);
    CHECK(data.size() >= 6);

    std::size_t split_total = 0;
    for (const char * split : {"train", "val", "test"}) {
      const auto idx = data.split_indices(split);
      CHECK(!idx.empty());
      split_total += idx.size();
      for (const auto i : idx) {
        CHECK(data.records()[i].split == split);
        CHECK(data.records()[i].points.size() == 20);
      }
    }
    CHECK(split_total == data.size());

    const auto & grid = data.grid(data.records()[0].env_id);
    CHECK(grid.cells.h == 160);
    CHECK(&data.grid(data.records()[0].env_id) == &grid);  // cached
    CHECK_THROWS_AS(data.grid("env999"), DataError);
  }

  TEST_CASE("dataset loader rejects duplicate scene ids")
  {
    const auto base = fs::temp_directory_path() / "trajcast_pipeline_dup";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string src = tiny_data_dir() + "/scenes.jsonl";
    std::istringstream lines(slurp(src));
    std::string first;
    std::getline(lines, first);
    spit((base / "scenes.jsonl").string(), first + "\n" + first + "\n");
    CHECK_THROWS_AS(pipeline::load_dataset(base.string(), 20), DataError);
  }

  TEST_CASE("training is deterministic and stages stay isolated")
  {
    const auto cfg = tiny_cfg();
    const auto data = pipeline::load_dataset(cfg.dataset.data_dir, 20);

    const auto base = fs::temp_directory_path() / "trajcast_pipeline_train";
    fs::remove_all(base);
    const std::string dir_a = (base / "a").string();
    const std::string dir_b = (base / "b").string();
    pipeline::Trainer(cfg, data, dir_a).run("all");
    pipeline::Trainer(cfg, data, dir_b).run("all");

    for (const char * name : {"pretrain", "lg", "sg", "micro"}) {
      const std::string rel = "/checkpoints/" + std::string(name) + ".ckpt";
      CHECK(slurp(dir_a + rel) == slurp(dir_b + rel));
      CHECK(slurp(dir_a + "/logs/" + name + ".jsonl") ==
            slurp(dir_b + "/logs/" + name + ".jsonl"));
    }

    // Retraining the fine stage must not touch the coarse checkpoints.
    const auto pre = hash_file(dir_a + "/checkpoints/pretrain.ckpt");
    const auto lg = hash_file(dir_a + "/checkpoints/lg.ckpt");
    const auto sg = hash_file(dir_a + "/checkpoints/sg.ckpt");
    pipeline::Trainer(cfg, data, dir_a).run("micro");
    CHECK(hash_file(dir_a + "/checkpoints/pretrain.ckpt") == pre);
    CHECK(hash_file(dir_a + "/checkpoints/lg.ckpt") == lg);
    CHECK(hash_file(dir_a + "/checkpoints/sg.ckpt") == sg);

    // A stale coarse checkpoint is rejected, not silently consumed.
    pipeline::RunConfig other = cfg;
    other.model.beta = 10.0;
    CHECK_THROWS_AS(pipeline::Trainer(other, data, dir_a).run("micro"), DataError);

    // Identically seeded forecasts produce identical reports.
    const pipeline::Forecaster fc(cfg, data, dir_a + "/checkpoints");
    const auto rep1 = pipeline::evaluate_split(fc, 2);
    const auto rep2 = pipeline::evaluate_split(fc, 2);
    const std::string csv = metrics::report_csv(rep1);
    CHECK(csv == metrics::report_csv(rep2));
    CHECK(csv.find("\nmean,2,") != std::string::npos);
  }

  TEST_CASE("ablations reshape the cascade")
  {
    auto cfg = tiny_cfg();
    cfg.ablation.without_sg_net = true;
    const auto data = pipeline::load_dataset(cfg.dataset.data_dir, 20);

    const auto base = fs::temp_directory_path() / "trajcast_pipeline_ablate";
    fs::remove_all(base);
    const std::string dir = (base / "nosg").string();
    pipeline::Trainer(cfg, data, dir).run("all");
    CHECK(fs::exists(dir + "/checkpoints/lg.ckpt"));
    CHECK(fs::exists(dir + "/checkpoints/micro.ckpt"));
    CHECK(!fs::exists(dir + "/checkpoints/sg.ckpt"));

    const pipeline::Forecaster fc(cfg, data, dir + "/checkpoints");
    const auto idx = data.split_indices("test");
    REQUIRE(!idx.empty());
    Rng rng = Rng::derive(cfg.eval.seed, data.records()[idx[0]].scene_id);
    const auto sf = fc.forecast(data.records()[idx[0]], 2, rng);
    CHECK(sf.set.samples.size() == 2);
    CHECK(sf.set.samples[0].size() == 12);

    // Asking for a disabled stage is an error, not a no-op.
    CHECK_THROWS_AS(pipeline::Trainer(cfg, data, dir).run("sg"), DataError);
    auto cfg_nm = tiny_cfg();
    cfg_nm.ablation.without_micro = true;
    CHECK_THROWS_AS(pipeline::Trainer(cfg_nm, data, dir).run("micro"), DataError);
    CHECK_THROWS_AS(pipeline::Trainer(cfg, data, dir).run("warp"), DataError);
  }

  TEST_CASE("cli maps failures to exit codes")
  {
    const auto base = fs::temp_directory_path() / "trajcast_pipeline_cli";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string out = (base / "out").string();

    const std::string cfg_path = (base / "run.toml").string();
    spit(cfg_path, pipeline::canonical_config(tiny_cfg()));

    // Usage problems exit 1.
    CHECK(cli({}) == 1);
    CHECK(cli({"frobnicate"}) == 1);
    CHECK(cli({"evaluate", "--bogus"}) == 1);
    CHECK(cli({"train", "--stage", "warp", "--config", cfg_path}) == 1);
    CHECK(cli({"train", "--ablation", "nothing", "--config", cfg_path}) == 1);

    // Data problems exit 2.
    CHECK(cli({"train", "--config", (base / "missing.toml").string()}) == 2);
    const std::string broken = (base / "broken.toml").string();
    spit(broken, "[dataset]\nbogus = 1\n");
    CHECK(cli({"train", "--config", broken}) == 2);
    CHECK(cli({"inspect", "nosuchscene", "--config", cfg_path, "--out", out}) == 2);

    // Missing checkpoints are a state fault, exit 3.
    CHECK(cli({"evaluate", "--config", cfg_path, "--out", out}) == 3);

    // A full tiny run drives every subcommand to success.
    CHECK(cli({"train", "--stage", "all", "--config", cfg_path, "--out", out}) == 0);
    CHECK(cli({"evaluate", "--k", "2", "--config", cfg_path, "--out", out}) == 0);
    CHECK(fs::exists(out + "/metrics_k2.csv"));
    CHECK(fs::exists(out + "/experiment_k2.json"));

    const auto data = pipeline::load_dataset(tiny_data_dir(), 20);
    const std::string scene = data.records()[0].scene_id;
    CHECK(cli({"inspect", scene, "--config", cfg_path, "--out", out}) == 0);
    CHECK(fs::exists(out + "/inspect/" + scene + "_c0.pgm"));

    CHECK(cli({"plot", "--config", cfg_path, "--out", out, "--count", "1"}) == 0);

    // Rank statistics over two hand-written metric files.
    const std::string csv_a = (base / "a.csv").string();
    const std::string csv_b = (base / "b.csv").string();
    spit(csv_a,
         "scene_id,k,min_ade,min_fde,kde_nll,ecfl\n"
         "s1,2,0.5,1.0,2.0,100.0\n"
         "s2,2,0.7,1.2,2.1,100.0\n"
         "mean,2,0.6,1.1,2.05,100.0\n");
    spit(csv_b,
         "scene_id,k,min_ade,min_fde,kde_nll,ecfl\n"
         "s1,2,0.6,1.1,2.2,90.0\n"
         "s2,2,0.8,1.3,2.3,95.0\n"
         "mean,2,0.7,1.2,2.25,92.5\n");
    CHECK(cli({"stats", "--metric", "ade", "--rope", "auto", "--config", cfg_path, "--out",
               out, csv_a, csv_b}) == 0);
    CHECK(fs::exists(out + "/stats_min_ade.json"));
    CHECK(cli({"stats", "--metric", "nonsense", "--config", cfg_path, "--out", out, csv_a,
               csv_b}) == 2);
    CHECK(cli({"stats", "--metric", "ade", "--config", cfg_path, "--out", out, csv_a}) == 1);

    const std::string csv_c = (base / "c.csv").string();
    spit(csv_c,
         "scene_id,k,min_ade,min_fde,kde_nll,ecfl\n"
         "zz,2,0.6,1.1,2.2,90.0\n");
    CHECK(cli({"stats", "--metric", "ade", "--config", cfg_path, "--out", out, csv_a,
               csv_c}) == 2);
  }
}
