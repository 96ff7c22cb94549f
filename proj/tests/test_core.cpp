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

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "trajcast/core/image_io.hpp"
#include "trajcast/core/parallel.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/core/vec2.hpp"

using namespace trajcast;

TEST_SUITE("core")
{
  TEST_CASE("rounding is half away from zero")
  {
    CHECK(round_half_away(0.5) == 1);
    CHECK(round_half_away(-0.5) == -1);
    CHECK(round_half_away(1.5) == 2);
    CHECK(round_half_away(-1.5) == -2);
    CHECK(round_half_away(2.5) == 3);
    CHECK(round_half_away(0.49) == 0);
    CHECK(round_half_away(-0.49) == 0);
    CHECK(round_half_away(3.0) == 3);
  }

  TEST_CASE("vec2 arithmetic")
  {
    const Vec2 a{3.0, 4.0};
    const Vec2 b{1.0, -2.0};
    CHECK((a + b).x == 4.0);
    CHECK((a - b).y == 6.0);
    CHECK((a * 2.0).x == 6.0);
    CHECK(a.norm() == doctest::Approx(5.0));
    CHECK(dot(a, b) == doctest::Approx(-5.0));
  }

  TEST_CASE("fnv1a published vectors")
  {
    CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  }

  TEST_CASE("rng streams are reproducible and tag-separated")
  {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) {
      CHECK(a.next_u64() == b.next_u64());
    }

    Rng c = Rng::derive(7, "alpha");
    Rng d = Rng::derive(7, "alpha");
    Rng e = Rng::derive(7, "beta");
    const auto x = c.next_u64();
    CHECK(x == d.next_u64());
    CHECK(x != e.next_u64());

    Rng f = Rng::derive(7, "alpha", 1);
    CHECK(f.next_u64() != x);
  }

  TEST_CASE("rng distributions stay in range")
  {
    Rng rng(99);
    double mean = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double u = rng.uniform01();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      const double v = rng.uniform(-3.0, 5.0);
      CHECK(v >= -3.0);
      CHECK(v < 5.0);
      const std::int64_t k = rng.uniform_int(2, 6);
      CHECK(k >= 2);
      CHECK(k <= 6);
      mean += rng.normal();
    }
    mean /= 10000.0;
    CHECK(std::abs(mean) < 0.05);

    const auto perm = rng.permutation(50);
    auto sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(sorted[i] == i);
    }

    const auto dir = rng.dirichlet(std::vector<double>{0.5, 1.0, 1.0, 2.0});
    CHECK(std::accumulate(dir.begin(), dir.end(), 0.0) == doctest::Approx(1.0));
    for (const double w : dir) {
      CHECK(w > 0.0);
    }
  }

  TEST_CASE("rng state roundtrip resumes the stream")
  {
    Rng a(1234);
    a.next_u64();
    const auto st = a.state();
    const auto expect = a.next_u64();
    Rng b(0);
    b.set_state(st);
    CHECK(b.next_u64() == expect);
  }

  TEST_CASE("pgm roundtrip and deterministic png bytes")
  {
    const auto dir = std::filesystem::temp_directory_path() / "trajcast_io_test";
    std::filesystem::create_directories(dir);

    GridU8 img(5, 7);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 7; ++x) {
        img.at(y, x) = static_cast<std::uint8_t>(y * 40 + x);
      }
    }
    const std::string pgm = (dir / "a.pgm").string();
    write_pgm(pgm, img);
    const GridU8 back = read_pgm(pgm);
    REQUIRE(back.h == 5);
    REQUIRE(back.w == 7);
    CHECK(back.v == img.v);

    Raster flat(3, 3);
    for (auto & v : flat.v) {
      v = 2.5;  // constant plane exercises the degenerate scale range
    }
    const std::string flat_path = (dir / "flat.pgm").string();
    write_pgm_scaled(flat_path, flat);
    CHECK(read_pgm(flat_path).h == 3);

    ImageRGB rgb(4, 6);
    for (std::size_t i = 0; i < rgb.v.size(); ++i) {
      rgb.v[i] = static_cast<std::uint8_t>(i * 7);
    }
    const std::string p1 = (dir / "x1.png").string();
    const std::string p2 = (dir / "x2.png").string();
    write_png(p1, rgb);
    write_png(p2, rgb);
    CHECK(hash_file(p1) == hash_file(p2));
    rgb.v[0] ^= 1;
    write_png(p2, rgb);
    CHECK(hash_file(p1) != hash_file(p2));
  }

  TEST_CASE("parallel map matches serial and propagates exceptions")
  {
    std::vector<double> out_serial(1000);
    std::vector<double> out_par(1000);
    parallel_for(1000, 1, [&](std::size_t i) { out_serial[i] = std::sqrt(double(i)); });
    parallel_for(1000, 4, [&](std::size_t i) { out_par[i] = std::sqrt(double(i)); });
    CHECK(out_serial == out_par);

    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [&](std::size_t i) {
                                   if (i == 57) {
                                     throw std::runtime_error("boom");
                                   }
                                 }),
                    std::runtime_error);
  }
}
