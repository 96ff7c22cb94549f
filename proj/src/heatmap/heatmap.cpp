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

#include "trajcast/heatmap/heatmap.hpp"

#include <atomic>
#include <cmath>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/image_io.hpp"

namespace trajcast::heatmap
{

namespace
{
std::atomic<std::uint64_t> g_warning_count{0};
}  // namespace

void HeatmapStack::validate(bool model_input) const
{
  if (channels.size() != roles.size()) {
    throw DataError("heatmap stack: channel/role count mismatch");
  }
  if (channels.empty()) {
    throw DataError("heatmap stack: empty");
  }
  const int h = channels.front().h;
  const int w = channels.front().w;
  if (h != w) {
    throw DataError("heatmap stack: channels must be square");
  }
  int semantic = 0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].h != h || channels[c].w != w) {
      throw DataError("heatmap stack: inconsistent channel dims");
    }
    for (const double v : channels[c].v) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("heatmap stack: value outside [0,1]");
      }
    }
    if (roles[c] == ChannelRole::kSemanticMap) {
      ++semantic;
    }
  }
  if (model_input && semantic != 1) {
    throw DataError("heatmap stack: model input needs exactly one semantic-map channel");
  }
}

Raster encode_points(const std::vector<Vec2> & points_px, int h, int w, double variance)
{
  if (variance <= 0.0) {
    throw DomainError("encode_points: variance must be positive");
  }
  Raster out(h, w, 0.0);
  // 4 sigma cutoff; contributions beyond it are written as exactly zero.
  const double cutoff_sq = 16.0 * variance;
  const int reach = static_cast<int>(std::ceil(4.0 * std::sqrt(variance)));
  for (const auto & p : points_px) {
    const auto cx = round_half_away(p.x);
    const auto cy = round_half_away(p.y);
    const int y0 = static_cast<int>(cy) - reach;
    const int y1 = static_cast<int>(cy) + reach;
    const int x0 = static_cast<int>(cx) - reach;
    const int x1 = static_cast<int>(cx) + reach;
    for (int y = std::max(y0, 0); y <= std::min(y1, h - 1); ++y) {
      for (int x = std::max(x0, 0); x <= std::min(x1, w - 1); ++x) {
        const double dx = static_cast<double>(x) - static_cast<double>(cx);
        const double dy = static_cast<double>(y) - static_cast<double>(cy);
        const double d_sq = dx * dx + dy * dy;
        if (d_sq > cutoff_sq) {
          continue;
        }
        const double v = std::exp(-d_sq / (2.0 * variance));
        if (v > out.at(y, x)) {
          out.at(y, x) = v;
        }
      }
    }
  }
  return out;
}

Raster encode_past(const std::vector<Vec2> & traj_px, int h, int w, double variance)
{
  if (traj_px.empty()) {
    g_warning_count.fetch_add(1);
    return Raster(h, w, 0.0);
  }
  return encode_points(traj_px, h, w, variance);
}

Raster encode_goal(const Vec2 & point_px, int h, int w, double variance)
{
  return encode_points({point_px}, h, w, variance);
}

Vec2 decode_peak(const Raster & hm)
{
  if (hm.v.empty()) {
    throw DecodeError("decode_peak: empty raster");
  }
  double best = 0.0;
  int bx = -1;
  int by = -1;
  for (int y = 0; y < hm.h; ++y) {
    for (int x = 0; x < hm.w; ++x) {
      const double v = hm.at(y, x);
      if (v > best) {
        best = v;
        bx = x;
        by = y;
      }
    }
  }
  if (bx < 0) {
    throw DecodeError("decode_peak: all-zero raster");
  }
  return {static_cast<double>(bx), static_cast<double>(by)};
}

Vec2 softargmax(const Raster & hm, double temperature)
{
  if (temperature <= 0.0) {
    throw DomainError("softargmax: temperature must be positive");
  }
  double max_v = hm.v.front();
  for (const double v : hm.v) {
    max_v = std::max(max_v, v);
  }
  double z = 0.0;
  double ex = 0.0;
  double ey = 0.0;
  for (int y = 0; y < hm.h; ++y) {
    for (int x = 0; x < hm.w; ++x) {
      const double wgt = std::exp((hm.at(y, x) - max_v) / temperature);
      z += wgt;
      ex += wgt * x;
      ey += wgt * y;
    }
  }
  return {ex / z, ey / z};
}

std::uint64_t warning_count() { return g_warning_count.load(); }
void reset_warning_count() { g_warning_count.store(0); }

void dump_stack(const HeatmapStack & stack, const std::string & path_prefix)
{
  for (std::size_t c = 0; c < stack.channels.size(); ++c) {
    write_pgm_scaled(path_prefix + "_c" + std::to_string(c) + ".pgm", stack.channels[c], 0.0,
                     1.0);
  }
}

}  // namespace trajcast::heatmap
