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

#ifndef TRAJCAST__NN__CHECKPOINT_HPP_
#define TRAJCAST__NN__CHECKPOINT_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "trajcast/nn/param_pack.hpp"

namespace trajcast::nn
{

struct CheckpointMeta
{
  std::uint64_t config_hash{0};
  std::string stage;
  std::uint64_t epoch{0};
  std::array<std::uint64_t, 4> rng_state{};
  // Hash of the macro checkpoint this model was trained against; 0 if none.
  std::uint64_t macro_ref_hash{0};
};

// Versioned little-endian archive: metadata, named parameter slices, and
// optional optimizer state. Content is fully determined by its inputs.
void save_checkpoint(const std::string & path, const ParamPack & pack, const Adam * adam,
                     const CheckpointMeta & meta);

// Loads values into a pack built from the same config; throws DataError when
// the config hash, version, or tensor layout disagrees.
CheckpointMeta load_checkpoint(const std::string & path, std::uint64_t expected_config_hash,
                               ParamPack & pack, Adam * adam);

// Reads only the metadata block.
CheckpointMeta peek_checkpoint(const std::string & path);

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__CHECKPOINT_HPP_
