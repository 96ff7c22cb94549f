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

#include "trajcast/core/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trajcast/core/rng.hpp"
#include "trajcast/core/vec2.hpp"

namespace trajcast
{

void write_pgm(const std::string & path, const GridU8 & img)
{
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("write_pgm: cannot open " + path);
  }
  f << "P5\n" << img.w << " " << img.h << "\n255\n";
  f.write(reinterpret_cast<const char *>(img.v.data()), static_cast<std::streamsize>(img.v.size()));
  if (!f) {
    throw std::runtime_error("write_pgm: write failed for " + path);
  }
}

GridU8 read_pgm(const std::string & path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("read_pgm: cannot open " + path);
  }
  std::string magic;
  f >> magic;
  if (magic != "P5") {
    throw std::runtime_error("read_pgm: " + path + " is not binary PGM");
  }
  auto next_token = [&f, &path]() {
    std::string tok;
    for (;;) {
      if (!(f >> tok)) {
        throw std::runtime_error("read_pgm: truncated header in " + path);
      }
      if (tok[0] == '#') {
        std::string rest;
        std::getline(f, rest);
        continue;
      }
      return tok;
    }
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw std::runtime_error("read_pgm: unsupported header in " + path);
  }
  f.get();  // single whitespace after maxval
  GridU8 img(h, w);
  f.read(reinterpret_cast<char *>(img.v.data()), static_cast<std::streamsize>(img.v.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.v.size())) {
    throw std::runtime_error("read_pgm: truncated pixel data in " + path);
  }
  return img;
}

void write_pgm_scaled(const std::string & path, const Raster & img, double lo, double hi)
{
  if (lo == hi) {
    lo = img.v.empty() ? 0.0 : *std::min_element(img.v.begin(), img.v.end());
    hi = img.v.empty() ? 1.0 : *std::max_element(img.v.begin(), img.v.end());
    if (hi <= lo) {
      hi = lo + 1.0;
    }
  }
  GridU8 out(img.h, img.w);
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < img.v.size(); ++i) {
    const double t = std::clamp((img.v[i] - lo) * scale, 0.0, 255.0);
    out.v[i] = static_cast<std::uint8_t>(round_half_away(t));
  }
  write_pgm(path, out);
}

namespace
{

void put_u32_be(std::vector<std::uint8_t> & out, std::uint32_t v)
{
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t> & out, const char type[4],
               const std::vector<std::uint8_t> & payload)
{
  put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc =
    crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png(const std::string & path, const ImageRGB & img)
{
  // Filter type 0 on every scanline.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(img.h) * (static_cast<std::size_t>(img.w) * 3 + 1));
  for (int y = 0; y < img.h; ++y) {
    raw.push_back(0);
    const auto * row = &img.v[static_cast<std::size_t>(y) * img.w * 3];
    raw.insert(raw.end(), row, row + static_cast<std::size_t>(img.w) * 3);
  }

  uLongf comp_cap = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_cap);
  if (compress2(comp.data(), &comp_cap, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("write_png: deflate failed");
  }
  comp.resize(comp_cap);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(img.w));
  put_u32_be(ihdr, static_cast<std::uint32_t>(img.h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type RGB
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("write_png: cannot open " + path);
  }
  f.write(reinterpret_cast<const char *>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw std::runtime_error("write_png: write failed for " + path);
  }
}

std::uint64_t hash_file(const std::string & path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("hash_file: cannot open " + path);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(f.gcount()), h);
  }
  return h;
}

}  // namespace trajcast
