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

#include "trajcast/pipeline/plots.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "trajcast/core/errors.hpp"

namespace trajcast::pipeline
{

namespace
{

struct Color
{
  std::uint8_t r, g, b;
};

constexpr Color kFree{245, 245, 245};
constexpr Color kWall{60, 60, 60};
constexpr Color kHeat{255, 140, 0};
constexpr Color kPast{30, 80, 220};
constexpr Color kTruth{20, 160, 60};
constexpr Color kSample{220, 50, 50};

std::uint8_t mix(std::uint8_t base, std::uint8_t over, double a)
{
  const double v = (1.0 - a) * base + a * over;
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

void draw_line(ImageRGB & img, const Vec2 & a, const Vec2 & b, const Color & c)
{
  int x0 = static_cast<int>(round_half_away(a.x));
  int y0 = static_cast<int>(round_half_away(a.y));
  const int x1 = static_cast<int>(round_half_away(b.x));
  const int y1 = static_cast<int>(round_half_away(b.y));
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    img.set(y0, x0, c.r, c.g, c.b);
    if (x0 == x1 && y0 == y1) {
      break;
    }
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_polyline(ImageRGB & img, const std::vector<Vec2> & pts_px, const Color & c)
{
  for (std::size_t i = 1; i < pts_px.size(); ++i) {
    draw_line(img, pts_px[i - 1], pts_px[i], c);
  }
}

}  // namespace

ImageRGB render_scene(const Forecaster & fc, const envsim::SceneRecord & rec,
                      const Forecaster::SceneForecast & sf)
{
  const SceneEncoder & enc = fc.encoder();
  const raster::SemanticGrid & grid = enc.data().grid(rec.env_id);
  const raster::Homography model_h = enc.model_h(rec.env_id);
  const int gh = grid.cells.h;
  const int gw = grid.cells.w;

  Raster mean_hm;
  if (!sf.goal_heatmaps.empty()) {
    mean_hm = Raster(sf.goal_heatmaps[0].h, sf.goal_heatmaps[0].w);
    for (const Raster & hm : sf.goal_heatmaps) {
      for (std::size_t i = 0; i < mean_hm.size(); ++i) {
        mean_hm.v[i] += hm.v[i];
      }
    }
    for (double & v : mean_hm.v) {
      v /= static_cast<double>(sf.goal_heatmaps.size());
    }
  }

  ImageRGB img(gh, gw);
  for (int y = 0; y < gh; ++y) {
    for (int x = 0; x < gw; ++x) {
      Color c = grid.navigable_px(x, y) ? kFree : kWall;
      if (mean_hm.h > 0) {
        // Look the canvas pixel up in model-raster space for the heat wash.
        const Vec2 world = raster::pixel_to_world(grid.world_to_px,
                                                  {static_cast<double>(x), static_cast<double>(y)});
        const Vec2 mp = raster::world_to_pixel(model_h, world);
        const int mx = static_cast<int>(round_half_away(mp.x));
        const int my = static_cast<int>(round_half_away(mp.y));
        if (mean_hm.in_bounds(my, mx)) {
          const double a = std::clamp(mean_hm.at(my, mx), 0.0, 1.0);
          c = {mix(c.r, kHeat.r, a), mix(c.g, kHeat.g, a), mix(c.b, kHeat.b, a)};
        }
      }
      img.set(y, x, c.r, c.g, c.b);
    }
  }

  for (const auto & sample : sf.set.samples) {
    draw_polyline(img, raster::world_to_pixel(grid.world_to_px, sample), kSample);
  }
  draw_polyline(img, raster::world_to_pixel(grid.world_to_px, sf.set.gt_future), kTruth);
  const std::vector<Vec2> past(rec.points.begin(),
                               rec.points.begin() + enc.config().dataset.t_p);
  draw_polyline(img, raster::world_to_pixel(grid.world_to_px, past), kPast);
  return img;
}

std::vector<std::string> render_plots(const Forecaster & fc, int k, int count,
                                      const std::string & out_dir)
{
  const RunConfig & cfg = fc.encoder().config();
  const Dataset & data = fc.encoder().data();
  auto idx = data.split_indices(cfg.eval.split);
  if (idx.empty()) {
    throw DataError("plot: split " + cfg.eval.split + " has no scenes");
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data.records()[a].scene_id < data.records()[b].scene_id;
  });
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> paths;
  const std::size_t n = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < n; ++i) {
    const auto & rec = data.records()[idx[i]];
    Rng rng = Rng::derive(cfg.eval.seed, rec.scene_id);
    const auto sf = fc.forecast(rec, k, rng);
    const ImageRGB img = render_scene(fc, rec, sf);
    std::string path = out_dir + "/plot_" + rec.scene_id + ".png";
    write_png(path, img);
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace trajcast::pipeline
