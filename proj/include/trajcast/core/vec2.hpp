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

#ifndef TRAJCAST__CORE__VEC2_HPP_
#define TRAJCAST__CORE__VEC2_HPP_

#include <cmath>
#include <cstdint>

namespace trajcast
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 & operator+=(const Vec2 & o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double dot(const Vec2 & a, const Vec2 & b) { return a.x * b.x + a.y * b.y; }

// Rounds half away from zero. Every world-to-cell conversion in the code base
// goes through this so that the simulator, the rasterizer and the metrics all
// agree on which cell a point falls into.
inline std::int64_t round_half_away(double v)
{
  return static_cast<std::int64_t>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

}  // namespace trajcast

#endif  // TRAJCAST__CORE__VEC2_HPP_
