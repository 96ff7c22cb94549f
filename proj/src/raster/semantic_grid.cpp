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

#include "trajcast/raster/semantic_grid.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "trajcast/core/errors.hpp"
#include "trajcast/core/image_io.hpp"

namespace trajcast::raster
{

void SemanticGrid::validate() const
{
  if (class_values.count(pad_class) == 0) {
    throw DataError("semantic grid: pad_class has no class value");
  }
  if (navigable_classes.count(pad_class) != 0) {
    throw DataError("semantic grid: pad_class must be non-navigable");
  }
  std::set<double> seen;
  for (const auto & [cls, value] : class_values) {
    if (value < 0.0 || value > 1.0) {
      throw DataError("semantic grid: class value outside [0,1]");
    }
    if (!seen.insert(value).second) {
      throw DataError("semantic grid: duplicate class value");
    }
  }
  for (const auto cls : navigable_classes) {
    if (class_values.count(cls) == 0) {
      throw DataError("semantic grid: navigable class has no class value");
    }
  }
  for (const auto cell : cells.v) {
    if (class_values.count(cell) == 0) {
      throw DataError("semantic grid: cell holds undeclared class");
    }
  }
}

double SemanticGrid::value_of(std::uint8_t cls) const
{
  const auto it = class_values.find(cls);
  if (it == class_values.end()) {
    throw DataError("semantic grid: undeclared class id");
  }
  return it->second;
}

std::uint8_t SemanticGrid::class_at(int x, int y) const
{
  if (!cells.in_bounds(y, x)) {
    return pad_class;
  }
  return cells.at(y, x);
}

bool SemanticGrid::navigable_px(int x, int y) const
{
  return navigable_classes.count(class_at(x, y)) != 0;
}

bool SemanticGrid::navigable_world(const Vec2 & p) const
{
  const Vec2 px = world_to_pixel(world_to_px, p);
  return navigable_px(static_cast<int>(round_half_away(px.x)),
                      static_cast<int>(round_half_away(px.y)));
}

namespace
{

// Sidecar lives next to the raster with the extension swapped, so a grid
// saved as envs/env000.pgm gets its metadata in envs/env000.json.
std::string sidecar_path(const std::string & pgm_path)
{
  if (pgm_path.size() >= 4 && pgm_path.substr(pgm_path.size() - 4) == ".pgm") {
    return pgm_path.substr(0, pgm_path.size() - 4) + ".json";
  }
  return pgm_path + ".json";
}

}  // namespace

void save_semantic_grid(const std::string & pgm_path, const SemanticGrid & grid)
{
  write_pgm(pgm_path, grid.cells);

  nlohmann::ordered_json j;
  nlohmann::ordered_json cv = nlohmann::ordered_json::object();
  for (const auto & [cls, value] : grid.class_values) {
    cv[std::to_string(static_cast<int>(cls))] = value;
  }
  j["class_values"] = cv;
  j["navigable_classes"] = nlohmann::ordered_json::array();
  for (const auto cls : grid.navigable_classes) {
    j["navigable_classes"].push_back(static_cast<int>(cls));
  }
  j["pad_class"] = static_cast<int>(grid.pad_class);
  j["homography"] = grid.world_to_px.m;

  std::ofstream f(sidecar_path(pgm_path));
  if (!f) {
    throw DataError("save_semantic_grid: cannot open sidecar for " + pgm_path);
  }
  f << j.dump(2) << "\n";
}

SemanticGrid load_semantic_grid(const std::string & pgm_path)
{
  SemanticGrid grid;
  grid.cells = read_pgm(pgm_path);

  std::ifstream f(sidecar_path(pgm_path));
  if (!f) {
    throw DataError("load_semantic_grid: missing sidecar for " + pgm_path);
  }
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("load_semantic_grid: bad sidecar: ") + e.what());
  }
  try {
    for (const auto & [key, value] : j.at("class_values").items()) {
      grid.class_values[static_cast<std::uint8_t>(std::stoi(key))] = value.get<double>();
    }
    for (const auto & cls : j.at("navigable_classes")) {
      grid.navigable_classes.insert(static_cast<std::uint8_t>(cls.get<int>()));
    }
    grid.pad_class = static_cast<std::uint8_t>(j.at("pad_class").get<int>());
    const auto h = j.at("homography").get<std::vector<double>>();
    if (h.size() != 9) {
      throw DataError("load_semantic_grid: homography must have 9 entries");
    }
    for (std::size_t i = 0; i < 9; ++i) {
      grid.world_to_px.m[i] = h[i];
    }
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("load_semantic_grid: bad sidecar: ") + e.what());
  }
  grid.validate();
  return grid;
}

}  // namespace trajcast::raster
