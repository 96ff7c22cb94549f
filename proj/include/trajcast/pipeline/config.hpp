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

#ifndef TRAJCAST__PIPELINE__CONFIG_HPP_
#define TRAJCAST__PIPELINE__CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trajcast::pipeline
{

// One parsed config value. Arrays must be homogeneous; nested arrays and
// tables are out of scope for the flat grammar.
struct ConfigValue
{
  enum class Kind : std::uint8_t
  {
    kString,
    kInt,
    kFloat,
    kBool,
    kIntList,
    kFloatList,
    kStringList,
  };

  Kind kind{Kind::kString};
  std::string str;
  std::int64_t i{0};
  double f{0.0};
  bool b{false};
  std::vector<std::int64_t> int_list;
  std::vector<double> float_list;
  std::vector<std::string> string_list;
};

// Flat key/value file: [section] headers, key = value lines, # comments.
// Values are strings, integers, floats, booleans or arrays thereof. Keys are
// stored as "section.key". Malformed input throws DataError naming the
// origin and line.
class ConfigFile
{
public:
  static ConfigFile parse_file(const std::string & path);
  static ConfigFile parse_string(const std::string & text, const std::string & origin);

  bool has(const std::string & key) const { return entries_.count(key) > 0; }
  const std::map<std::string, ConfigValue> & entries() const { return entries_; }
  const std::string & origin() const { return origin_; }

  // Typed getters; wrong kind throws DataError. Integer values are accepted
  // where a float is requested.
  std::string get_string(const std::string & key) const;
  std::int64_t get_int(const std::string & key) const;
  std::uint64_t get_uint(const std::string & key) const;
  double get_float(const std::string & key) const;
  bool get_bool(const std::string & key) const;
  std::vector<int> get_int_list(const std::string & key) const;

private:
  std::map<std::string, ConfigValue> entries_;
  std::string origin_;
};

// Window geometry and raster conventions of the dataset being consumed.
struct DatasetProfile
{
  std::string data_dir{"data/desk"};
  std::string units{"meters"};
  int t_p{8};
  int t_f{12};
  std::vector<int> sg_indices{4, 8};  // waypoint steps among the t_f future
  int raster_size{64};                // model raster side in pixels
  double heatmap_variance{4.0};       // goal bump variance in model px^2
};

// Parameters for the simulate subcommand; mirrors the generator defaults.
struct SimulateProfile
{
  std::uint64_t seed{7};
  int train_envs{8};
  int val_envs{1};
  int test_envs{2};
  int scenes_per_env{50};
  int grid_size{256};
  double px_per_m{12.0};
  int workers{1};
};

struct ModelProfile
{
  std::vector<int> lg_encoder_channels{16, 16, 32, 32, 32};
  std::vector<int> prior_channels{16, 16};
  int sg_extra_channels{64};
  int latent_w{10};
  int latent_z{20};
  double fb_lg{0.08};    // per-dimension free-bits floor
  double fb_micro{0.07};  // floor on the total fine-stage KL
  double beta{50.0};
  std::string sg_input_mode{"gt"};  // gt | predicted | mixed
};

struct TrainProfile
{
  std::uint64_t seed{11};
  int batch_size{32};
  double lr_lg{1e-3};
  double lr_sg{1e-3};
  double lr_micro{1e-3};
  int pretrain_epochs{10};
  int anneal_epochs{10};
  int lg_epochs{12};
  int sg_epochs{5};
  int micro_epochs{30};
};

struct EvalProfile
{
  std::uint64_t seed{13};
  std::vector<int> k_list{20, 50};
  std::string split{"test"};
  int workers{1};
  // Diagnostic override: decode the prior mean instead of drawing.
  bool degenerate_prior{false};
};

struct AblationFlags
{
  bool without_sg_net{false};
  bool without_micro{false};
  bool without_ll_prior{false};
};

struct RunConfig
{
  DatasetProfile dataset;
  SimulateProfile simulate;
  ModelProfile model;
  TrainProfile train;
  EvalProfile eval;
  AblationFlags ablation;

  // Throws DataError on broken invariants (non-increasing sg_indices,
  // unknown mode strings, impossible dimensions).
  void validate() const;
};

// Applies a parsed file over the defaults. Unknown keys throw DataError so
// typos fail loudly. The result is validated.
RunConfig run_config_from(const ConfigFile & file);
RunConfig load_run_config(const std::string & path);

// Fixed-order serialization of every profile; reparsing it yields an
// identical config.
std::string canonical_config(const RunConfig & cfg);

// Stable hash over the sections that determine checkpoint content: dataset,
// model, train and ablation. Eval and simulate knobs are excluded so reruns
// with a different K list or eval seed still match trained checkpoints.
std::uint64_t config_hash(const RunConfig & cfg);

}  // namespace trajcast::pipeline

#endif  // TRAJCAST__PIPELINE__CONFIG_HPP_
