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

#include "trajcast/envsim/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "trajcast/core/errors.hpp"
#include "trajcast/core/parallel.hpp"

namespace trajcast::envsim
{

void DatasetSpec::validate() const
{
  if (train_envs < 1 || val_envs < 1 || test_envs < 1) {
    throw DomainError("DatasetSpec: every split needs at least one environment");
  }
  if (scenes_per_env < 1) {
    throw DomainError("DatasetSpec: scenes_per_env must be positive");
  }
  if (t_p < 1 || t_f < 1) {
    throw DomainError("DatasetSpec: window lengths must be positive");
  }
  if (window_stride < 1) {
    throw DomainError("DatasetSpec: window_stride must be positive");
  }
  if (workers < 1) {
    throw DomainError("DatasetSpec: workers must be positive");
  }
  env.validate();
  force.validate();
  sim.validate();
}

namespace
{

std::string zero_pad(const char * prefix, int value, int digits)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, digits, value);
  return buf;
}

std::string fmt6(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Records are written by hand so every float carries exactly six decimals;
// that makes reruns with the same seed byte-identical.
std::string record_line(const SceneRecord & rec)
{
  std::string line = "{\"scene_id\":\"" + rec.scene_id + "\",\"env_id\":\"" + rec.env_id +
                     "\",\"split\":\"" + rec.split + "\",\"fps\":" + fmt6(rec.fps) +
                     ",\"points\":[";
  for (std::size_t i = 0; i < rec.points.size(); ++i) {
    if (i > 0) {
      line += ',';
    }
    line += '[' + fmt6(rec.points[i].x) + ',' + fmt6(rec.points[i].y) + ']';
  }
  line += "]}";
  return line;
}

}  // namespace

BuildSummary build_dataset(const DatasetSpec & spec, const std::string & out_dir)
{
  spec.validate();
  SimulationConfig sim = spec.sim;
  sim.min_frames = std::max(sim.min_frames, spec.window_len());

  std::error_code ec;
  std::filesystem::create_directories(out_dir + "/envs", ec);
  if (ec) {
    throw DataError("build_dataset: cannot create " + out_dir + "/envs: " + ec.message());
  }

  const int env_count = spec.train_envs + spec.val_envs + spec.test_envs;
  std::vector<raster::SemanticGrid> grids(static_cast<std::size_t>(env_count));
  std::vector<std::string> env_ids(static_cast<std::size_t>(env_count));
  std::vector<std::string> splits(static_cast<std::size_t>(env_count));
  for (int e = 0; e < env_count; ++e) {
    EnvironmentSpec env_spec = spec.env;
    env_spec.seed = Rng::derive(spec.seed, "env-seed", static_cast<std::uint64_t>(e)).next_u64();
    grids[static_cast<std::size_t>(e)] = generate_environment(env_spec);
    env_ids[static_cast<std::size_t>(e)] = zero_pad("env", e, 3);
    splits[static_cast<std::size_t>(e)] =
      e < spec.train_envs ? "train" : (e < spec.train_envs + spec.val_envs ? "val" : "test");
    save_semantic_grid(out_dir + "/envs/" + env_ids[static_cast<std::size_t>(e)] + ".pgm",
                       grids[static_cast<std::size_t>(e)]);
  }

  // Each (env, scene) pair owns a derived rng stream, so the simulated paths
  // are independent of worker count and schedule.
  const std::size_t total = static_cast<std::size_t>(env_count) * spec.scenes_per_env;
  std::vector<std::vector<Vec2>> paths(total);
  parallel_for(total, spec.workers, [&](std::size_t i) {
    const auto e = static_cast<int>(i) / spec.scenes_per_env;
    const auto s = static_cast<int>(i) % spec.scenes_per_env;
    Rng rng = Rng::derive(spec.seed, "scene", static_cast<std::uint64_t>(e),
                          static_cast<std::uint64_t>(s));
    paths[i] = simulate_scene(grids[static_cast<std::size_t>(e)], rng, spec.force, sim);
  });

  const std::string jsonl_path = out_dir + "/scenes.jsonl";
  std::ofstream out(jsonl_path);
  if (!out) {
    throw DataError("build_dataset: cannot open " + jsonl_path);
  }
  BuildSummary summary;
  summary.env_count = env_count;
  summary.path_count = static_cast<int>(total);
  const int len = spec.window_len();
  for (std::size_t i = 0; i < total; ++i) {
    const auto e = static_cast<std::size_t>(i) / static_cast<std::size_t>(spec.scenes_per_env);
    const auto s = static_cast<int>(i % static_cast<std::size_t>(spec.scenes_per_env));
    const auto & path = paths[i];
    int win = 0;
    for (std::size_t w0 = 0; w0 + static_cast<std::size_t>(len) <= path.size();
         w0 += static_cast<std::size_t>(spec.window_stride), ++win) {
      SceneRecord rec;
      rec.scene_id = env_ids[e] + zero_pad("_s", s, 3) + zero_pad("_w", win, 2);
      rec.env_id = env_ids[e];
      rec.split = splits[e];
      rec.fps = spec.sim.out_hz;
      rec.points.assign(path.begin() + static_cast<std::ptrdiff_t>(w0),
                        path.begin() + static_cast<std::ptrdiff_t>(w0) + len);
      out << record_line(rec) << "\n";
      ++summary.record_count;
    }
  }
  if (!out) {
    throw DataError("build_dataset: write failed for " + jsonl_path);
  }
  return summary;
}

std::vector<SceneRecord> load_scene_records(const std::string & jsonl_path, int window_len)
{
  std::ifstream in(jsonl_path);
  if (!in) {
    throw DataError("load_scene_records: cannot open " + jsonl_path);
  }
  std::vector<SceneRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string where = jsonl_path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception & e) {
      throw DataError("load_scene_records: " + where + ": " + e.what());
    }
    SceneRecord rec;
    try {
      rec.scene_id = j.at("scene_id").get<std::string>();
      rec.env_id = j.at("env_id").get<std::string>();
      rec.split = j.at("split").get<std::string>();
      rec.fps = j.at("fps").get<double>();
      for (const auto & p : j.at("points")) {
        if (!p.is_array() || p.size() != 2) {
          throw DataError("load_scene_records: " + where + ": malformed point");
        }
        rec.points.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    } catch (const nlohmann::json::exception & e) {
      throw DataError("load_scene_records: " + where + ": " + e.what());
    }
    if (rec.split != "train" && rec.split != "val" && rec.split != "test") {
      throw DataError("load_scene_records: " + where + ": unknown split " + rec.split);
    }
    if (static_cast<int>(rec.points.size()) != window_len) {
      throw DataError("load_scene_records: " + where + ": expected " +
                      std::to_string(window_len) + " points, got " +
                      std::to_string(rec.points.size()));
    }
    if (rec.fps <= 0.0) {
      throw DataError("load_scene_records: " + where + ": fps must be positive");
    }
    for (const auto & p : rec.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw DataError("load_scene_records: " + where + ": non-finite coordinate");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace trajcast::envsim
