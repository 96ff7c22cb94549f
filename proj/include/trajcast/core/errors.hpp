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

#ifndef TRAJCAST__CORE__ERRORS_HPP_
#define TRAJCAST__CORE__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace trajcast
{

// Error taxonomy. The CLI maps DataError to exit code 2 and everything else
// escaping a command to exit code 3; argument misuse is exit code 1.

struct TransformError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct DecodeError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent external inputs (configs, datasets, tables).
struct DataError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Operation invoked before its prerequisites exist (e.g. missing checkpoints).
struct StateError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Non-finite losses or latent parameters during training.
struct TrainingFault : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

}  // namespace trajcast

#endif  // TRAJCAST__CORE__ERRORS_HPP_
