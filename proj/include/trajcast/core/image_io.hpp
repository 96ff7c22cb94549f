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

#ifndef TRAJCAST__CORE__IMAGE_IO_HPP_
#define TRAJCAST__CORE__IMAGE_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/core/raster.hpp"

namespace trajcast
{

void write_pgm(const std::string & path, const GridU8 & img);
GridU8 read_pgm(const std::string & path);

// Writes a Raster as 8-bit PGM, linearly mapping [lo, hi] to [0, 255].
// With lo == hi the image range itself is used (constant images map to 0).
void write_pgm_scaled(const std::string & path, const Raster & img, double lo = 0.0,
                      double hi = 0.0);

// Interleaved RGB, row-major, 3 bytes per pixel.
struct ImageRGB
{
  int h{0};
  int w{0};
  std::vector<std::uint8_t> v;

  ImageRGB(int height, int width, std::uint8_t fill = 0)
  : h(height), w(width), v(static_cast<std::size_t>(height) * width * 3, fill)
  {
  }

  void set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b)
  {
    if (y < 0 || y >= h || x < 0 || x >= w) {
      return;
    }
    auto * p = &v[(static_cast<std::size_t>(y) * w + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

// Minimal PNG encoder (8-bit RGB, zlib-compressed, no ancillary chunks).
// Output carries no timestamps, so identical pixels give identical bytes.
void write_png(const std::string & path, const ImageRGB & img);

std::uint64_t hash_file(const std::string & path);

}  // namespace trajcast

#endif  // TRAJCAST__CORE__IMAGE_IO_HPP_
