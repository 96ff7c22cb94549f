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

#include "trajcast/pipeline/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/rng.hpp"

namespace trajcast::pipeline
{

namespace
{

std::string trim(const std::string & s)
{
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
    ++a;
  }
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
    --b;
  }
  return s.substr(a, b - a);
}

bool is_ident(const std::string & s)
{
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
  }
  return true;
}

// Cuts a trailing comment, ignoring # inside double quotes.
std::string strip_comment(const std::string & line)
{
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      in_str = !in_str;
    } else if (line[i] == '#' && !in_str) {
      return line.substr(0, i);
    }
  }
  return line;
}

[[noreturn]] void fail(const std::string & origin, int line_no, const std::string & what)
{
  throw DataError("config " + origin + ":" + std::to_string(line_no) + ": " + what);
}

bool parse_int(const std::string & s, std::int64_t & out)
{
  if (s.empty()) {
    return false;
  }
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) {
    return false;
  }
  for (std::size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) {
      return false;
    }
  }
  out = std::strtoll(s.c_str(), nullptr, 10);
  return true;
}

bool parse_float(const std::string & s, double & out)
{
  if (s.empty()) {
    return false;
  }
  char * end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

ConfigValue parse_scalar(const std::string & text, const std::string & origin, int line_no)
{
  ConfigValue v;
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    const std::string inner = text.substr(1, text.size() - 2);
    if (inner.find('"') != std::string::npos) {
      fail(origin, line_no, "nested quotes are not supported");
    }
    v.kind = ConfigValue::Kind::kString;
    v.str = inner;
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = ConfigValue::Kind::kBool;
    v.b = text == "true";
    return v;
  }
  if (parse_int(text, v.i)) {
    v.kind = ConfigValue::Kind::kInt;
    return v;
  }
  if (parse_float(text, v.f)) {
    v.kind = ConfigValue::Kind::kFloat;
    return v;
  }
  fail(origin, line_no, "cannot parse value '" + text + "'");
}

// Splits top-level commas of an array body, honoring quoted strings.
std::vector<std::string> split_elements(const std::string & body, const std::string & origin,
                                        int line_no)
{
  std::vector<std::string> parts;
  std::string cur;
  bool in_str = false;
  for (char c : body) {
    if (c == '"') {
      in_str = !in_str;
      cur += c;
    } else if (c == ',' && !in_str) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_str) {
    fail(origin, line_no, "unterminated string in array");
  }
  const std::string last = trim(cur);
  if (!last.empty()) {
    parts.push_back(last);
  } else if (!parts.empty()) {
    fail(origin, line_no, "trailing comma in array");
  }
  return parts;
}

ConfigValue parse_value(const std::string & text, const std::string & origin, int line_no)
{
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') {
      fail(origin, line_no, "unterminated array");
    }
    const auto parts = split_elements(text.substr(1, text.size() - 2), origin, line_no);
    ConfigValue v;
    bool any_float = false;
    bool any_string = false;
    std::vector<ConfigValue> elems;
    for (const auto & p : parts) {
      elems.push_back(parse_scalar(p, origin, line_no));
      switch (elems.back().kind) {
        case ConfigValue::Kind::kFloat:
          any_float = true;
          break;
        case ConfigValue::Kind::kString:
          any_string = true;
          break;
        case ConfigValue::Kind::kInt:
          break;
        default:
          fail(origin, line_no, "arrays may hold numbers or strings only");
      }
    }
    if (any_string) {
      v.kind = ConfigValue::Kind::kStringList;
      for (const auto & e : elems) {
        if (e.kind != ConfigValue::Kind::kString) {
          fail(origin, line_no, "mixed array element types");
        }
        v.string_list.push_back(e.str);
      }
    } else if (any_float) {
      // Integer literals promote so [0.5, 1] parses as a float list.
      v.kind = ConfigValue::Kind::kFloatList;
      for (const auto & e : elems) {
        v.float_list.push_back(e.kind == ConfigValue::Kind::kInt ? static_cast<double>(e.i)
                                                                 : e.f);
      }
    } else {
      v.kind = ConfigValue::Kind::kIntList;
      for (const auto & e : elems) {
        v.int_list.push_back(e.i);
      }
    }
    return v;
  }
  return parse_scalar(text, origin, line_no);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string & text, const std::string & origin)
{
  ConfigFile out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(origin, line_no, "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!is_ident(section)) {
        fail(origin, line_no, "invalid section name '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!is_ident(key)) {
      fail(origin, line_no, "invalid key '" + key + "'");
    }
    if (section.empty()) {
      fail(origin, line_no, "key '" + key + "' outside any section");
    }
    const std::string full = section + "." + key;
    if (out.entries_.count(full) > 0) {
      fail(origin, line_no, "duplicate key '" + full + "'");
    }
    out.entries_[full] = parse_value(trim(line.substr(eq + 1)), origin, line_no);
  }
  return out;
}

ConfigFile ConfigFile::parse_file(const std::string & path)
{
  std::ifstream f(path);
  if (!f) {
    throw DataError("config: cannot open " + path);
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_string(buf.str(), path);
}

namespace
{

const ConfigValue & entry_of(const ConfigFile & f, const std::string & key)
{
  const auto it = f.entries().find(key);
  if (it == f.entries().end()) {
    throw DataError("config " + f.origin() + ": missing key " + key);
  }
  return it->second;
}

[[noreturn]] void wrong_kind(const ConfigFile & f, const std::string & key,
                             const std::string & expected)
{
  throw DataError("config " + f.origin() + ": key " + key + " expects " + expected);
}

}  // namespace

std::string ConfigFile::get_string(const std::string & key) const
{
  const auto & v = entry_of(*this, key);
  if (v.kind != ConfigValue::Kind::kString) {
    wrong_kind(*this, key, "a string");
  }
  return v.str;
}

std::int64_t ConfigFile::get_int(const std::string & key) const
{
  const auto & v = entry_of(*this, key);
  if (v.kind != ConfigValue::Kind::kInt) {
    wrong_kind(*this, key, "an integer");
  }
  return v.i;
}

std::uint64_t ConfigFile::get_uint(const std::string & key) const
{
  const std::int64_t i = get_int(key);
  if (i < 0) {
    wrong_kind(*this, key, "a non-negative integer");
  }
  return static_cast<std::uint64_t>(i);
}

double ConfigFile::get_float(const std::string & key) const
{
  const auto & v = entry_of(*this, key);
  if (v.kind == ConfigValue::Kind::kInt) {
    return static_cast<double>(v.i);
  }
  if (v.kind != ConfigValue::Kind::kFloat) {
    wrong_kind(*this, key, "a number");
  }
  return v.f;
}

bool ConfigFile::get_bool(const std::string & key) const
{
  const auto & v = entry_of(*this, key);
  if (v.kind != ConfigValue::Kind::kBool) {
    wrong_kind(*this, key, "a boolean");
  }
  return v.b;
}

std::vector<int> ConfigFile::get_int_list(const std::string & key) const
{
  const auto & v = entry_of(*this, key);
  if (v.kind != ConfigValue::Kind::kIntList) {
    wrong_kind(*this, key, "an integer array");
  }
  std::vector<int> out;
  for (std::int64_t x : v.int_list) {
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      wrong_kind(*this, key, "32-bit integers");
    }
    out.push_back(static_cast<int>(x));
  }
  return out;
}

void RunConfig::validate() const
{
  auto bad = [](const std::string & what) { throw DataError("config: " + what); };

  if (dataset.t_p < 1 || dataset.t_f < 2) {
    bad("t_p must be >= 1 and t_f >= 2");
  }
  if (dataset.sg_indices.empty()) {
    bad("sg_indices must not be empty");
  }
  int prev = -1;
  for (int idx : dataset.sg_indices) {
    if (idx <= prev) {
      bad("sg_indices must be strictly increasing");
    }
    if (idx < 0 || idx >= dataset.t_f - 1) {
      bad("sg_indices must lie in [0, t_f - 1); the last step is the long goal");
    }
    prev = idx;
  }
  if (dataset.units != "meters" && dataset.units != "pixels") {
    bad("units must be meters or pixels");
  }
  if (dataset.raster_size < 8) {
    bad("raster_size must be >= 8");
  }
  if (!(dataset.heatmap_variance > 0.0)) {
    bad("heatmap_variance must be positive");
  }

  if (simulate.train_envs < 1 || simulate.val_envs < 1 || simulate.test_envs < 1) {
    bad("simulate env counts must be >= 1");
  }
  if (simulate.scenes_per_env < 1 || simulate.grid_size < 32 || !(simulate.px_per_m > 0.0) ||
      simulate.workers < 1) {
    bad("simulate profile out of range");
  }

  const std::size_t depth = model.lg_encoder_channels.size();
  if (depth < 2) {
    bad("lg_encoder_channels needs at least two blocks");
  }
  for (int c : model.lg_encoder_channels) {
    if (c < 1) {
      bad("lg_encoder_channels entries must be positive");
    }
  }
  if (dataset.raster_size % (1 << (depth - 1)) != 0) {
    bad("raster_size must be divisible by 2^(encoder depth - 1)");
  }
  for (int c : model.prior_channels) {
    if (c < 1) {
      bad("prior_channels entries must be positive");
    }
  }
  if (model.sg_extra_channels < 1 || model.latent_w < 1 || model.latent_z < 1) {
    bad("model dimensions must be positive");
  }
  if (model.fb_lg < 0.0 || model.fb_micro < 0.0 || model.beta < 0.0) {
    bad("fb and beta must be non-negative");
  }
  if (model.sg_input_mode != "gt" && model.sg_input_mode != "predicted" &&
      model.sg_input_mode != "mixed") {
    bad("sg_input_mode must be gt, predicted or mixed");
  }

  if (train.batch_size < 1) {
    bad("batch_size must be >= 1");
  }
  if (!(train.lr_lg > 0.0) || !(train.lr_sg > 0.0) || !(train.lr_micro > 0.0)) {
    bad("learning rates must be positive");
  }
  if (train.pretrain_epochs < 0 || train.lg_epochs < 0 || train.sg_epochs < 0 ||
      train.micro_epochs < 0) {
    bad("epoch counts must be non-negative");
  }
  if (train.anneal_epochs < 1) {
    bad("anneal_epochs must be >= 1");
  }

  if (eval.k_list.empty()) {
    bad("k_list must not be empty");
  }
  for (int k : eval.k_list) {
    if (k < 1) {
      bad("k_list entries must be >= 1");
    }
  }
  if (eval.split != "train" && eval.split != "val" && eval.split != "test") {
    bad("eval split must be train, val or test");
  }
  if (eval.workers < 1) {
    bad("eval workers must be >= 1");
  }

  if (ablation.without_sg_net && ablation.without_micro) {
    bad("without_sg_net and without_micro cannot be combined");
  }
}

RunConfig run_config_from(const ConfigFile & f)
{
  RunConfig cfg;
  for (const auto & [key, value] : f.entries()) {
    (void)value;
    if (key == "dataset.data_dir") {
      cfg.dataset.data_dir = f.get_string(key);
    } else if (key == "dataset.units") {
      cfg.dataset.units = f.get_string(key);
    } else if (key == "dataset.t_p") {
      cfg.dataset.t_p = static_cast<int>(f.get_int(key));
    } else if (key == "dataset.t_f") {
      cfg.dataset.t_f = static_cast<int>(f.get_int(key));
    } else if (key == "dataset.sg_indices") {
      cfg.dataset.sg_indices = f.get_int_list(key);
    } else if (key == "dataset.raster_size") {
      cfg.dataset.raster_size = static_cast<int>(f.get_int(key));
    } else if (key == "dataset.heatmap_variance") {
      cfg.dataset.heatmap_variance = f.get_float(key);
    } else if (key == "simulate.seed") {
      cfg.simulate.seed = f.get_uint(key);
    } else if (key == "simulate.train_envs") {
      cfg.simulate.train_envs = static_cast<int>(f.get_int(key));
    } else if (key == "simulate.val_envs") {
      cfg.simulate.val_envs = static_cast<int>(f.get_int(key));
    } else if (key == "simulate.test_envs") {
      cfg.simulate.test_envs = static_cast<int>(f.get_int(key));
    } else if (key == "simulate.scenes_per_env") {
      cfg.simulate.scenes_per_env = static_cast<int>(f.get_int(key));
    } else if (key == "simulate.grid_size") {
      cfg.simulate.grid_size = static_cast<int>(f.get_int(key));
    } else if (key == "simulate.px_per_m") {
      cfg.simulate.px_per_m = f.get_float(key);
    } else if (key == "simulate.workers") {
      cfg.simulate.workers = static_cast<int>(f.get_int(key));
    } else if (key == "model.lg_encoder_channels") {
      cfg.model.lg_encoder_channels = f.get_int_list(key);
    } else if (key == "model.prior_channels") {
      cfg.model.prior_channels = f.get_int_list(key);
    } else if (key == "model.sg_extra_channels") {
      cfg.model.sg_extra_channels = static_cast<int>(f.get_int(key));
    } else if (key == "model.latent_w") {
      cfg.model.latent_w = static_cast<int>(f.get_int(key));
    } else if (key == "model.latent_z") {
      cfg.model.latent_z = static_cast<int>(f.get_int(key));
    } else if (key == "model.fb_lg") {
      cfg.model.fb_lg = f.get_float(key);
    } else if (key == "model.fb_micro") {
      cfg.model.fb_micro = f.get_float(key);
    } else if (key == "model.beta") {
      cfg.model.beta = f.get_float(key);
    } else if (key == "model.sg_input_mode") {
      cfg.model.sg_input_mode = f.get_string(key);
    } else if (key == "train.seed") {
      cfg.train.seed = f.get_uint(key);
    } else if (key == "train.batch_size") {
      cfg.train.batch_size = static_cast<int>(f.get_int(key));
    } else if (key == "train.lr_lg") {
      cfg.train.lr_lg = f.get_float(key);
    } else if (key == "train.lr_sg") {
      cfg.train.lr_sg = f.get_float(key);
    } else if (key == "train.lr_micro") {
      cfg.train.lr_micro = f.get_float(key);
    } else if (key == "train.pretrain_epochs") {
      cfg.train.pretrain_epochs = static_cast<int>(f.get_int(key));
    } else if (key == "train.anneal_epochs") {
      cfg.train.anneal_epochs = static_cast<int>(f.get_int(key));
    } else if (key == "train.lg_epochs") {
      cfg.train.lg_epochs = static_cast<int>(f.get_int(key));
    } else if (key == "train.sg_epochs") {
      cfg.train.sg_epochs = static_cast<int>(f.get_int(key));
    } else if (key == "train.micro_epochs") {
      cfg.train.micro_epochs = static_cast<int>(f.get_int(key));
    } else if (key == "eval.seed") {
      cfg.eval.seed = f.get_uint(key);
    } else if (key == "eval.k_list") {
      cfg.eval.k_list = f.get_int_list(key);
    } else if (key == "eval.split") {
      cfg.eval.split = f.get_string(key);
    } else if (key == "eval.workers") {
      cfg.eval.workers = static_cast<int>(f.get_int(key));
    } else if (key == "eval.degenerate_prior") {
      cfg.eval.degenerate_prior = f.get_bool(key);
    } else if (key == "ablation.without_sg_net") {
      cfg.ablation.without_sg_net = f.get_bool(key);
    } else if (key == "ablation.without_micro") {
      cfg.ablation.without_micro = f.get_bool(key);
    } else if (key == "ablation.without_ll_prior") {
      cfg.ablation.without_ll_prior = f.get_bool(key);
    } else {
      throw DataError("config " + f.origin() + ": unknown key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string & path)
{
  return run_config_from(ConfigFile::parse_file(path));
}

namespace
{

std::string fmt_float(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<int> & v)
{
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) {
      s += ", ";
    }
    s += std::to_string(v[i]);
  }
  return s + "]";
}

void append_dataset(std::string & s, const RunConfig & c)
{
  s += "[dataset]\n";
  s += "data_dir = \"" + c.dataset.data_dir + "\"\n";
  s += "units = \"" + c.dataset.units + "\"\n";
  s += "t_p = " + std::to_string(c.dataset.t_p) + "\n";
  s += "t_f = " + std::to_string(c.dataset.t_f) + "\n";
  s += "sg_indices = " + fmt_list(c.dataset.sg_indices) + "\n";
  s += "raster_size = " + std::to_string(c.dataset.raster_size) + "\n";
  s += "heatmap_variance = " + fmt_float(c.dataset.heatmap_variance) + "\n";
}

void append_simulate(std::string & s, const RunConfig & c)
{
  s += "[simulate]\n";
  s += "seed = " + std::to_string(c.simulate.seed) + "\n";
  s += "train_envs = " + std::to_string(c.simulate.train_envs) + "\n";
  s += "val_envs = " + std::to_string(c.simulate.val_envs) + "\n";
  s += "test_envs = " + std::to_string(c.simulate.test_envs) + "\n";
  s += "scenes_per_env = " + std::to_string(c.simulate.scenes_per_env) + "\n";
  s += "grid_size = " + std::to_string(c.simulate.grid_size) + "\n";
  s += "px_per_m = " + fmt_float(c.simulate.px_per_m) + "\n";
  s += "workers = " + std::to_string(c.simulate.workers) + "\n";
}

void append_model(std::string & s, const RunConfig & c)
{
  s += "[model]\n";
  s += "lg_encoder_channels = " + fmt_list(c.model.lg_encoder_channels) + "\n";
  s += "prior_channels = " + fmt_list(c.model.prior_channels) + "\n";
  s += "sg_extra_channels = " + std::to_string(c.model.sg_extra_channels) + "\n";
  s += "latent_w = " + std::to_string(c.model.latent_w) + "\n";
  s += "latent_z = " + std::to_string(c.model.latent_z) + "\n";
  s += "fb_lg = " + fmt_float(c.model.fb_lg) + "\n";
  s += "fb_micro = " + fmt_float(c.model.fb_micro) + "\n";
  s += "beta = " + fmt_float(c.model.beta) + "\n";
  s += "sg_input_mode = \"" + c.model.sg_input_mode + "\"\n";
}

void append_train(std::string & s, const RunConfig & c)
{
  s += "[train]\n";
  s += "seed = " + std::to_string(c.train.seed) + "\n";
  s += "batch_size = " + std::to_string(c.train.batch_size) + "\n";
  s += "lr_lg = " + fmt_float(c.train.lr_lg) + "\n";
  s += "lr_sg = " + fmt_float(c.train.lr_sg) + "\n";
  s += "lr_micro = " + fmt_float(c.train.lr_micro) + "\n";
  s += "pretrain_epochs = " + std::to_string(c.train.pretrain_epochs) + "\n";
  s += "anneal_epochs = " + std::to_string(c.train.anneal_epochs) + "\n";
  s += "lg_epochs = " + std::to_string(c.train.lg_epochs) + "\n";
  s += "sg_epochs = " + std::to_string(c.train.sg_epochs) + "\n";
  s += "micro_epochs = " + std::to_string(c.train.micro_epochs) + "\n";
}

void append_eval(std::string & s, const RunConfig & c)
{
  s += "[eval]\n";
  s += "seed = " + std::to_string(c.eval.seed) + "\n";
  s += "k_list = " + fmt_list(c.eval.k_list) + "\n";
  s += "split = \"" + c.eval.split + "\"\n";
  s += "workers = " + std::to_string(c.eval.workers) + "\n";
  s += std::string("degenerate_prior = ") + (c.eval.degenerate_prior ? "true" : "false") + "\n";
}

void append_ablation(std::string & s, const RunConfig & c)
{
  s += "[ablation]\n";
  s += std::string("without_sg_net = ") + (c.ablation.without_sg_net ? "true" : "false") + "\n";
  s += std::string("without_micro = ") + (c.ablation.without_micro ? "true" : "false") + "\n";
  s +=
    std::string("without_ll_prior = ") + (c.ablation.without_ll_prior ? "true" : "false") + "\n";
}

}  // namespace

std::string canonical_config(const RunConfig & cfg)
{
  std::string s;
  append_dataset(s, cfg);
  s += "\n";
  append_simulate(s, cfg);
  s += "\n";
  append_model(s, cfg);
  s += "\n";
  append_train(s, cfg);
  s += "\n";
  append_eval(s, cfg);
  s += "\n";
  append_ablation(s, cfg);
  return s;
}

std::uint64_t config_hash(const RunConfig & cfg)
{
  // Checkpoint-relevant sections only; eval and simulate settings may change
  // between runs without invalidating trained parameters.
  std::string s;
  append_dataset(s, cfg);
  append_model(s, cfg);
  append_train(s, cfg);
  append_ablation(s, cfg);
  return fnv1a64(s);
}

}  // namespace trajcast::pipeline
