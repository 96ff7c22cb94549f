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

#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "trajcast/core/errors.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/metrics/metrics.hpp"

using namespace trajcast;

namespace
{

metrics::ForecastSet straight_set(int k, int t_f)
{
  metrics::ForecastSet fs;
  fs.scene_id = "s";
  for (int t = 0; t < t_f; ++t) {
    fs.gt_future.push_back({double(t), 0.0});
  }
  fs.samples.assign(std::size_t(k), fs.gt_future);
  return fs;
}

metrics::ForecastSet random_set(Rng & rng, int k, int t_f)
{
  metrics::ForecastSet fs;
  fs.scene_id = "r";
  for (int t = 0; t < t_f; ++t) {
    fs.gt_future.push_back({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
  }
  for (int i = 0; i < k; ++i) {
    std::vector<Vec2> s;
    for (int t = 0; t < t_f; ++t) {
      s.push_back({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
    }
    fs.samples.push_back(std::move(s));
  }
  return fs;
}

raster::SemanticGrid open_grid(int h, int w, double px_per_m)
{
  raster::SemanticGrid g;
  g.cells = GridU8(h, w, 0);
  g.class_values = {{0, 0.0}, {1, 1.0}};
  g.navigable_classes = {0};
  g.pad_class = 1;
  g.world_to_px = raster::Homography::scale(px_per_m);
  g.validate();
  return g;
}

}  // namespace

TEST_SUITE("metrics")
{
  TEST_CASE("displacement error basics")
  {
    metrics::ForecastSet fs = straight_set(1, 6);
    CHECK(metrics::min_ade(fs) == 0.0);
    CHECK(metrics::min_fde(fs) == 0.0);

    for (auto & p : fs.samples[0]) {
      p.x += 1.0;
    }
    CHECK(metrics::min_ade(fs) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::min_fde(fs) == doctest::Approx(1.0).epsilon(1e-12));

    // Second sample with half the offset wins the min.
    fs.samples.push_back(fs.gt_future);
    for (auto & p : fs.samples[1]) {
      p.x += 0.5;
    }
    CHECK(metrics::min_ade(fs) == doctest::Approx(0.5).epsilon(1e-12));

    // Exact final point with a wild detour in the middle still zeroes FDE.
    metrics::ForecastSet wild = straight_set(1, 4);
    wild.samples[0][1] = {100.0, -40.0};
    wild.samples[0][2] = {-7.0, 30.0};
    CHECK(metrics::min_fde(wild) == 0.0);
    CHECK(metrics::min_ade(wild) > 10.0);

    metrics::ForecastSet endpoint = straight_set(1, 3);
    endpoint.samples[0][2] = {endpoint.gt_future[2].x + 3.0, endpoint.gt_future[2].y + 4.0};
    CHECK(metrics::min_fde(endpoint) == doctest::Approx(5.0).epsilon(1e-12));
  }

  TEST_CASE("displacement errors match a brute-force oracle on random sets")
  {
    Rng rng = Rng::derive(77, "metrics-oracle");
    for (int trial = 0; trial < 200; ++trial) {
      const int k = 1 + int(rng.uniform_int(0, 7));
      const int t_f = 1 + int(rng.uniform_int(0, 11));
      const metrics::ForecastSet fs = random_set(rng, k, t_f);

      double oracle_ade = std::numeric_limits<double>::infinity();
      double oracle_fde = std::numeric_limits<double>::infinity();
      for (int i = 0; i < k; ++i) {
        double sum = 0.0;
        for (int t = 0; t < t_f; ++t) {
          const double dx = fs.samples[std::size_t(i)][std::size_t(t)].x -
                            fs.gt_future[std::size_t(t)].x;
          const double dy = fs.samples[std::size_t(i)][std::size_t(t)].y -
                            fs.gt_future[std::size_t(t)].y;
          sum += std::hypot(dx, dy);
        }
        oracle_ade = std::min(oracle_ade, sum / double(t_f));
        const double fdx = fs.samples[std::size_t(i)].back().x - fs.gt_future.back().x;
        const double fdy = fs.samples[std::size_t(i)].back().y - fs.gt_future.back().y;
        oracle_fde = std::min(oracle_fde, std::hypot(fdx, fdy));
      }
      CHECK(metrics::min_ade(fs) == oracle_ade);
      CHECK(metrics::min_fde(fs) == oracle_fde);
    }
  }

  TEST_CASE("kde density at the two-sample midpoint")
  {
    metrics::ForecastSet fs;
    fs.gt_future = {{0.0, 0.0}};
    fs.samples = {{{-1.0, 0.0}}, {{1.0, 0.0}}};

    metrics::KdeConfig cfg;
    cfg.fixed_bandwidth = 1.0;
    // -ln((1/(2 pi)) e^{-1/2}) = ln(2 pi) + 1/2
    CHECK(metrics::kde_nll(fs, cfg) == doctest::Approx(2.3378770664093453).epsilon(1e-12));

    // Duplicating the step leaves the mean unchanged.
    fs.gt_future.push_back({0.0, 0.0});
    for (auto & s : fs.samples) {
      s.push_back(s.front());
    }
    CHECK(metrics::kde_nll(fs, cfg) == doctest::Approx(2.3378770664093453).epsilon(1e-12));
  }

  TEST_CASE("kde nll grows as the ground truth leaves the cluster")
  {
    Rng rng = Rng::derive(78, "kde-cluster");
    metrics::ForecastSet fs;
    fs.gt_future = {{0.0, 0.0}};
    for (int i = 0; i < 12; ++i) {
      fs.samples.push_back({{rng.normal(0.0, 0.7), rng.normal(0.0, 0.7)}});
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (int step = 0; step < 5; ++step) {
      fs.gt_future[0] = {2.0 * double(step), 0.0};
      const double nll = metrics::kde_nll(fs);
      CHECK(nll > prev);
      prev = nll;
    }
  }

  TEST_CASE("degenerate sample clouds fall back to the fixed kernel")
  {
    metrics::reset_warning_count();
    metrics::ForecastSet fs;
    fs.gt_future = {{2.0, 3.0}};
    fs.samples = {{{2.0, 3.0}}, {{2.0, 3.0}}, {{2.0, 3.0}}};
    // Fallback kernel stddev 0.2 evaluated at its own center:
    // -ln(1/(2 pi 0.04)) = ln(2 pi) + ln(0.04)
    const double expected = std::log(2.0 * M_PI) + std::log(0.04);
    CHECK(metrics::kde_nll(fs) == doctest::Approx(-1.3809987584588553).epsilon(1e-12));
    CHECK(metrics::kde_nll(fs) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(metrics::warning_count() == 2);

    metrics::ForecastSet lone;
    lone.gt_future = {{1.0, 1.0}};
    lone.samples = {{{1.0, 1.0}}};
    CHECK(metrics::kde_nll(lone) == doctest::Approx(expected).epsilon(1e-12));

    // Collinear clouds have a singular covariance and use the fallback too.
    metrics::ForecastSet line;
    line.gt_future = {{0.0, 0.0}};
    line.samples = {{{-1.0, -1.0}}, {{0.0, 0.0}}, {{1.0, 1.0}}, {{2.0, 2.0}}};
    CHECK(std::isfinite(metrics::kde_nll(line)));
    metrics::reset_warning_count();
  }

  TEST_CASE("collision compliance follows the product-then-average rule")
  {
    raster::SemanticGrid g = open_grid(40, 40, 2.0);

    metrics::ForecastSet fs;
    fs.gt_future = {{2.0, 2.0}, {3.0, 2.0}, {4.0, 2.0}, {5.0, 2.0}};
    fs.samples = {fs.gt_future, fs.gt_future};
    CHECK(metrics::ecfl(fs, g) == 100.0);

    // Wall cell at pixel (5, 4) is world (2.5, 2): only sample 1 crosses it,
    // at t = 1, so exactly half the samples stay collision free.
    g.cells.at(4, 5) = 1;
    fs.samples[1] = {{2.0, 2.0}, {2.5, 2.0}, {3.0, 2.0}, {4.0, 2.0}};
    CHECK(metrics::ecfl(fs, g) == 50.0);

    SUBCASE("leaving the grid scores zero")
    {
      metrics::ForecastSet out;
      out.gt_future = {{2.0, 2.0}, {2.0, 2.0}};
      out.samples = {{{2.0, 2.0}, {100.0, 2.0}}};
      CHECK(metrics::ecfl(out, g) == 0.0);
    }
    SUBCASE("sample order and uniform duplication do not matter")
    {
      const double base = metrics::ecfl(fs, g);
      std::swap(fs.samples[0], fs.samples[1]);
      CHECK(metrics::ecfl(fs, g) == base);
      metrics::ForecastSet doubled = fs;
      doubled.samples.insert(doubled.samples.end(), fs.samples.begin(), fs.samples.end());
      CHECK(metrics::ecfl(doubled, g) == base);
    }
  }

  TEST_CASE("world translation leaves displacement and density metrics unchanged")
  {
    Rng rng = Rng::derive(79, "metrics-shift");
    for (int trial = 0; trial < 20; ++trial) {
      const metrics::ForecastSet fs = random_set(rng, 5, 8);
      const Vec2 shift{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0)};
      metrics::ForecastSet moved = fs;
      for (auto & p : moved.gt_future) {
        p += shift;
      }
      for (auto & s : moved.samples) {
        for (auto & p : s) {
          p += shift;
        }
      }
      CHECK(metrics::min_ade(moved) == doctest::Approx(metrics::min_ade(fs)).epsilon(1e-9));
      CHECK(metrics::min_fde(moved) == doctest::Approx(metrics::min_fde(fs)).epsilon(1e-9));
      CHECK(metrics::kde_nll(moved) == doctest::Approx(metrics::kde_nll(fs)).epsilon(1e-9));
    }
  }

  TEST_CASE("forecast set validation")
  {
    metrics::ForecastSet fs;
    CHECK_THROWS_AS(metrics::min_ade(fs), DomainError);
    fs.gt_future = {{0.0, 0.0}, {1.0, 0.0}};
    fs.samples = {{{0.0, 0.0}}};
    CHECK_THROWS_AS(metrics::min_fde(fs), DomainError);
  }

  TEST_CASE("report serialization is stable")
  {
    metrics::MetricReport report;
    report.units = "meters";
    report.scenes.push_back({"b", 5, 0.25, 0.5, 1.0, 100.0});
    report.scenes.push_back({"a", 5, 0.75, 1.5, 3.0, 50.0});
    report.sort_by_scene();
    CHECK(report.scenes.front().scene_id == "a");

    const std::string csv = metrics::report_csv(report);
    CHECK(csv == "scene_id,k,min_ade,min_fde,kde_nll,ecfl\n"
                 "a,5,0.750000,1.500000,3.000000,50.000000\n"
                 "b,5,0.250000,0.500000,1.000000,100.000000\n"
                 "mean,5,0.500000,1.000000,2.000000,75.000000\n");

    const auto parsed = nlohmann::json::parse(metrics::report_json(report));
    CHECK(parsed.at("units") == "meters");
    CHECK(parsed.at("scenes").size() == 2);
    CHECK(parsed.at("aggregate").at("min_ade").get<double>() == doctest::Approx(0.5));

    metrics::MetricReport empty;
    CHECK_THROWS_AS(empty.aggregate(), DomainError);
  }
}
