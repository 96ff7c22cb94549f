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

#ifndef TRAJCAST__PIPELINE__DATASET_IO_HPP_
#define TRAJCAST__PIPELINE__DATASET_IO_HPP_

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "trajcast/envsim/dataset.hpp"
#include "trajcast/raster/semantic_grid.hpp"

namespace trajcast::pipeline
{

// A loaded dataset directory: every scene record up front, environment
// grids on demand with per-environment caching.
class Dataset
{
public:
  Dataset(std::string root, std::vector<envsim::SceneRecord> records);

  const std::string & root() const { return root_; }
  const std::vector<envsim::SceneRecord> & records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  // Loads envs/<env_id>.pgm on first access; later calls return the cached
  // grid. Thread-safe. Missing or corrupt files throw DataError naming the
  // path.
  const raster::SemanticGrid & grid(const std::string & env_id) const;

  std::vector<std::size_t> split_indices(const std::string & split) const;

  // Forces every grid referenced by the records into the cache, so parallel
  // readers never contend on file I/O.
  void warm_grids() const;

private:
  std::string root_;
  std::vector<envsim::SceneRecord> records_;
  mutable std::mutex mu_;
  mutable std::map<std::string, raster::SemanticGrid> cache_;
};

// Reads <root>/scenes.jsonl, validates window length and record shape, and
// rejects duplicate scene ids. Grids attach lazily via Dataset::grid.
Dataset load_dataset(const std::string & root, int window_len);

}  // namespace trajcast::pipeline

#endif  // TRAJCAST__PIPELINE__DATASET_IO_HPP_
