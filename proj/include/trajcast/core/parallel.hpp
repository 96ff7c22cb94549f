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

#ifndef TRAJCAST__CORE__PARALLEL_HPP_
#define TRAJCAST__CORE__PARALLEL_HPP_

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trajcast
{

// Runs fn(i) for i in [0, n). Each item must write only to its own output
// slot; then the result is independent of the worker count and of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn && fn)
{
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) {
          err = std::current_exception();
        }
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) {
    pool.emplace_back(body);
  }
  for (auto & th : pool) {
    th.join();
  }
  if (err) {
    std::rethrow_exception(err);
  }
}

}  // namespace trajcast

#endif  // TRAJCAST__CORE__PARALLEL_HPP_
