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

#ifndef TRAJCAST__NN__PARAM_PACK_HPP_
#define TRAJCAST__NN__PARAM_PACK_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/nn/tensor.hpp"

namespace trajcast::nn
{

// All model parameters live in one flat buffer of named segments. Layers keep
// offsets into it, so gradients are plain buffers of the same length, the
// optimizer is a flat update, and checkpoints are a list of named slices.
class ParamPack
{
public:
  struct Entry
  {
    std::string name;
    std::size_t offset;
    std::size_t count;
    int rows;
    int cols;
  };

  std::size_t add(const std::string & name, int rows, int cols)
  {
    for (const auto & e : entries_) {
      if (e.name == name) {
        throw ConfigError("param pack: duplicate parameter name " + name);
      }
    }
    const std::size_t offset = data_.size();
    entries_.push_back({name, offset, static_cast<std::size_t>(rows) * cols, rows, cols});
    data_.resize(offset + static_cast<std::size_t>(rows) * cols, 0.0);
    return offset;
  }

  std::size_t size() const { return data_.size(); }
  double * data() { return data_.data(); }
  const double * data() const { return data_.data(); }
  std::vector<double> & values() { return data_; }
  const std::vector<double> & values() const { return data_; }
  const std::vector<Entry> & entries() const { return entries_; }

  const Entry & find(const std::string & name) const
  {
    for (const auto & e : entries_) {
      if (e.name == name) {
        return e;
      }
    }
    throw ConfigError("param pack: unknown parameter " + name);
  }

  std::vector<double> zeros_like() const { return std::vector<double>(data_.size(), 0.0); }

private:
  std::vector<double> data_;
  std::vector<Entry> entries_;
};

inline void init_uniform(double * p, std::size_t n, double limit, Rng & rng)
{
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = rng.uniform(-limit, limit);
  }
}

// Glorot-style uniform bound for a (fan_out x fan_in) weight.
inline double xavier_limit(int fan_in, int fan_out)
{
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

struct Adam
{
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  std::uint64_t t{0};
  std::vector<double> m;
  std::vector<double> v;

  void reset(std::size_t n)
  {
    t = 0;
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }

  void step(std::vector<double> & params, const std::vector<double> & grad)
  {
    if (m.size() != params.size()) {
      reset(params.size());
    }
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      params[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__PARAM_PACK_HPP_
