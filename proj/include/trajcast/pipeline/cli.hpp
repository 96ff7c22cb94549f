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

#ifndef TRAJCAST__PIPELINE__CLI_HPP_
#define TRAJCAST__PIPELINE__CLI_HPP_

namespace trajcast::pipeline
{

// Full command-line surface, callable in-process so tests can drive it.
// Returns the process exit code: 0 success (including --help), 1 argument
// misuse, 2 data or config error, 3 anything else escaping a command
// (missing checkpoints, training faults).
int run_cli(int argc, const char * const * argv);

}  // namespace trajcast::pipeline

#endif  // TRAJCAST__PIPELINE__CLI_HPP_
