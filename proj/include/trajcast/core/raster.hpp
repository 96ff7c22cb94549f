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

#ifndef TRAJCAST__CORE__RASTER_HPP_
#define TRAJCAST__CORE__RASTER_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace trajcast
{

// Dense row-major single-channel raster of doubles. Pixel (x, y) addresses
// column x of row y.
struct Raster
{
  int h{0};
  int w{0};
  std::vector<double> v;

  Raster() = default;
  Raster(int height, int width, double fill = 0.0)
  : h(height), w(width), v(static_cast<std::size_t>(height) * width, fill)
  {
    if (height <= 0 || width <= 0) {
      throw std::invalid_argument("Raster: dimensions must be positive");
    }
  }

  double & at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
  bool in_bounds(int y, int x) const { return y >= 0 && y < h && x >= 0 && x < w; }
  std::size_t size() const { return v.size(); }
};

// Row-major 8-bit class grid, same addressing convention as Raster.
struct GridU8
{
  int h{0};
  int w{0};
  std::vector<std::uint8_t> v;

  GridU8() = default;
  GridU8(int height, int width, std::uint8_t fill = 0)
  : h(height), w(width), v(static_cast<std::size_t>(height) * width, fill)
  {
    if (height <= 0 || width <= 0) {
      throw std::invalid_argument("GridU8: dimensions must be positive");
    }
  }

  std::uint8_t & at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
  bool in_bounds(int y, int x) const { return y >= 0 && y < h && x >= 0 && x < w; }
};

}  // namespace trajcast

#endif  // TRAJCAST__CORE__RASTER_HPP_
