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

#include "trajcast/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "trajcast/core/errors.hpp"

namespace trajcast::nn
{

namespace
{

constexpr char kMagic[4] = {'T', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream & f, T v)
{
  f.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream & f, const std::string & path)
{
  T v{};
  f.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!f) {
    throw DataError("checkpoint: truncated file " + path);
  }
  return v;
}

void put_string(std::ofstream & f, const std::string & s)
{
  put<std::uint16_t>(f, static_cast<std::uint16_t>(s.size()));
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream & f, const std::string & path)
{
  const auto n = get<std::uint16_t>(f, path);
  std::string s(n, '\0');
  f.read(s.data(), n);
  if (!f) {
    throw DataError("checkpoint: truncated file " + path);
  }
  return s;
}

void put_doubles(std::ofstream & f, const double * p, std::size_t n)
{
  f.write(reinterpret_cast<const char *>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::ifstream & f, double * p, std::size_t n, const std::string & path)
{
  f.read(reinterpret_cast<char *>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!f) {
    throw DataError("checkpoint: truncated file " + path);
  }
}

CheckpointMeta read_header(std::ifstream & f, const std::string & path)
{
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const auto version = get<std::uint32_t>(f, path);
  if (version != kVersion) {
    throw DataError("checkpoint: unsupported version in " + path);
  }
  CheckpointMeta meta;
  meta.config_hash = get<std::uint64_t>(f, path);
  meta.stage = get_string(f, path);
  meta.epoch = get<std::uint64_t>(f, path);
  for (auto & w : meta.rng_state) {
    w = get<std::uint64_t>(f, path);
  }
  meta.macro_ref_hash = get<std::uint64_t>(f, path);
  return meta;
}

}  // namespace

void save_checkpoint(const std::string & path, const ParamPack & pack, const Adam * adam,
                     const CheckpointMeta & meta)
{
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw DataError("checkpoint: cannot open " + path + " for writing");
  }
  f.write(kMagic, 4);
  put<std::uint32_t>(f, kVersion);
  put<std::uint64_t>(f, meta.config_hash);
  put_string(f, meta.stage);
  put<std::uint64_t>(f, meta.epoch);
  for (const auto w : meta.rng_state) {
    put<std::uint64_t>(f, w);
  }
  put<std::uint64_t>(f, meta.macro_ref_hash);

  put<std::uint32_t>(f, static_cast<std::uint32_t>(pack.entries().size()));
  for (const auto & e : pack.entries()) {
    put_string(f, e.name);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(e.rows));
    put<std::uint32_t>(f, static_cast<std::uint32_t>(e.cols));
    put_doubles(f, pack.data() + e.offset, e.count);
  }

  put<std::uint8_t>(f, adam != nullptr ? 1 : 0);
  if (adam != nullptr) {
    put<std::uint64_t>(f, adam->t);
    put_doubles(f, adam->m.data(), adam->m.size());
    put_doubles(f, adam->v.data(), adam->v.size());
  }
  if (!f) {
    throw DataError("checkpoint: write failed for " + path);
  }
}

CheckpointMeta load_checkpoint(const std::string & path, std::uint64_t expected_config_hash,
                               ParamPack & pack, Adam * adam)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw StateError("checkpoint: missing file " + path);
  }
  const CheckpointMeta meta = read_header(f, path);
  if (meta.config_hash != expected_config_hash) {
    throw DataError("checkpoint: config hash mismatch for " + path);
  }
  const auto n_entries = get<std::uint32_t>(f, path);
  if (n_entries != pack.entries().size()) {
    throw DataError("checkpoint: tensor count mismatch for " + path);
  }
  for (const auto & e : pack.entries()) {
    const std::string name = get_string(f, path);
    const auto rows = get<std::uint32_t>(f, path);
    const auto cols = get<std::uint32_t>(f, path);
    if (name != e.name || rows != static_cast<std::uint32_t>(e.rows) ||
        cols != static_cast<std::uint32_t>(e.cols)) {
      throw DataError("checkpoint: tensor layout mismatch at " + name + " in " + path);
    }
    get_doubles(f, pack.data() + e.offset, e.count, path);
  }
  const auto has_adam = get<std::uint8_t>(f, path);
  if (has_adam != 0) {
    const auto t = get<std::uint64_t>(f, path);
    std::vector<double> m(pack.size());
    std::vector<double> v(pack.size());
    get_doubles(f, m.data(), m.size(), path);
    get_doubles(f, v.data(), v.size(), path);
    if (adam != nullptr) {
      adam->t = t;
      adam->m = std::move(m);
      adam->v = std::move(v);
    }
  } else if (adam != nullptr) {
    adam->reset(pack.size());
  }
  return meta;
}

CheckpointMeta peek_checkpoint(const std::string & path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw StateError("checkpoint: missing file " + path);
  }
  return read_header(f, path);
}

}  // namespace trajcast::nn
