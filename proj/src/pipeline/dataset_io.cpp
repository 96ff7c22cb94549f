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

#include "trajcast/pipeline/dataset_io.hpp"

#include <set>
#include <utility>

#include "trajcast/core/errors.hpp"

namespace trajcast::pipeline
{

Dataset::Dataset(std::string root, std::vector<envsim::SceneRecord> records)
: root_(std::move(root)), records_(std::move(records))
{
}

const raster::SemanticGrid & Dataset::grid(const std::string & env_id) const
{
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(env_id);
  if (it == cache_.end()) {
    try {
      it =
        cache_.emplace(env_id, raster::load_semantic_grid(root_ + "/envs/" + env_id + ".pgm"))
          .first;
    } catch (const DataError &) {
      throw;
    } catch (const std::exception & e) {
      // Raster reader faults surface as data errors; the dataset is broken.
      throw DataError("dataset " + root_ + ": env " + env_id + ": " + e.what());
    }
  }
  return it->second;
}

std::vector<std::size_t> Dataset::split_indices(const std::string & split) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].split == split) {
      out.push_back(i);
    }
  }
  return out;
}

void Dataset::warm_grids() const
{
  std::set<std::string> ids;
  for (const auto & r : records_) {
    ids.insert(r.env_id);
  }
  for (const auto & id : ids) {
    grid(id);
  }
}

Dataset load_dataset(const std::string & root, int window_len)
{
  auto records = envsim::load_scene_records(root + "/scenes.jsonl", window_len);
  std::set<std::string> seen;
  for (const auto & r : records) {
    if (!seen.insert(r.scene_id).second) {
      throw DataError("dataset " + root + ": duplicate scene_id " + r.scene_id);
    }
  }
  return Dataset(root, std::move(records));
}

}  // namespace trajcast::pipeline
