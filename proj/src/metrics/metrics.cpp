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

#include "trajcast/metrics/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "trajcast/core/errors.hpp"

namespace trajcast::metrics
{

namespace
{

std::atomic<std::uint64_t> g_warning_count{0};

}  // namespace

void ForecastSet::validate() const
{
  if (samples.empty()) {
    throw DomainError("ForecastSet: need at least one sample");
  }
  if (gt_future.empty()) {
    throw DomainError("ForecastSet: empty ground-truth future");
  }
  for (const auto & s : samples) {
    if (s.size() != gt_future.size()) {
      throw DomainError("ForecastSet: sample horizon differs from ground truth");
    }
  }
}

double min_ade(const ForecastSet & fs)
{
  fs.validate();
  double best = std::numeric_limits<double>::infinity();
  for (const auto & sample : fs.samples) {
    double sum = 0.0;
    for (std::size_t t = 0; t < sample.size(); ++t) {
      sum += (sample[t] - fs.gt_future[t]).norm();
    }
    best = std::min(best, sum / double(sample.size()));
  }
  return best;
}

double min_fde(const ForecastSet & fs)
{
  fs.validate();
  double best = std::numeric_limits<double>::infinity();
  for (const auto & sample : fs.samples) {
    best = std::min(best, (sample.back() - fs.gt_future.back()).norm());
  }
  return best;
}

namespace
{

struct Kernel2d
{
  // Covariance entries and derived inverse/normalization.
  double inv00, inv01, inv11;
  double norm;  // 1 / (2 pi sqrt(det))

  static Kernel2d from_cov(double c00, double c01, double c11)
  {
    const double det = c00 * c11 - c01 * c01;
    Kernel2d k;
    k.inv00 = c11 / det;
    k.inv01 = -c01 / det;
    k.inv11 = c00 / det;
    k.norm = 1.0 / (2.0 * M_PI * std::sqrt(det));
    return k;
  }

  double density(const Vec2 & d) const
  {
    const double q = d.x * (inv00 * d.x + inv01 * d.y) + d.y * (inv01 * d.x + inv11 * d.y);
    return norm * std::exp(-0.5 * q);
  }
};

}  // namespace

double kde_nll(const ForecastSet & fs, const KdeConfig & cfg)
{
  fs.validate();
  if (cfg.fallback_bandwidth <= 0.0 || cfg.fixed_bandwidth < 0.0) {
    throw DomainError("kde_nll: bandwidths must be positive");
  }
  const std::size_t k = fs.samples.size();
  const std::size_t t_f = fs.gt_future.size();

  double nll_sum = 0.0;
  for (std::size_t t = 0; t < t_f; ++t) {
    Kernel2d kernel{};
    if (cfg.fixed_bandwidth > 0.0) {
      const double v = cfg.fixed_bandwidth * cfg.fixed_bandwidth;
      kernel = Kernel2d::from_cov(v, 0.0, v);
    } else {
      double mx = 0.0;
      double my = 0.0;
      for (const auto & s : fs.samples) {
        mx += s[t].x;
        my += s[t].y;
      }
      mx /= double(k);
      my /= double(k);
      double c00 = 0.0;
      double c01 = 0.0;
      double c11 = 0.0;
      for (const auto & s : fs.samples) {
        const double dx = s[t].x - mx;
        const double dy = s[t].y - my;
        c00 += dx * dx;
        c01 += dx * dy;
        c11 += dy * dy;
      }
      bool degenerate = k < 2;
      if (!degenerate) {
        c00 /= double(k - 1);
        c01 /= double(k - 1);
        c11 /= double(k - 1);
        // Scott's rule for a 2D kernel.
        const double scale = std::pow(double(k), -1.0 / 3.0);
        c00 *= scale;
        c01 *= scale;
        c11 *= scale;
        degenerate = c00 * c11 - c01 * c01 < 1e-12;
      }
      if (degenerate) {
        ++g_warning_count;
        const double v = cfg.fallback_bandwidth * cfg.fallback_bandwidth;
        kernel = Kernel2d::from_cov(v, 0.0, v);
      } else {
        kernel = Kernel2d::from_cov(c00, c01, c11);
      }
    }

    double density = 0.0;
    for (const auto & s : fs.samples) {
      density += kernel.density(fs.gt_future[t] - s[t]);
    }
    density /= double(k);
    nll_sum += -std::log(std::max(density, 1e-300));
  }
  return nll_sum / double(t_f);
}

double ecfl(const ForecastSet & fs, const raster::SemanticGrid & grid)
{
  fs.validate();
  double free_samples = 0.0;
  for (const auto & sample : fs.samples) {
    double prod = 1.0;
    for (const auto & pt : sample) {
      const Vec2 px = raster::world_to_pixel(grid.world_to_px, pt);
      const bool ok = grid.navigable_px(static_cast<int>(round_half_away(px.x)),
                                        static_cast<int>(round_half_away(px.y)));
      prod *= ok ? 1.0 : 0.0;
    }
    free_samples += prod;
  }
  return 100.0 * free_samples / double(fs.samples.size());
}

std::uint64_t warning_count() { return g_warning_count.load(); }
void reset_warning_count() { g_warning_count.store(0); }

void MetricReport::sort_by_scene()
{
  std::sort(scenes.begin(), scenes.end(),
            [](const SceneMetrics & a, const SceneMetrics & b) { return a.scene_id < b.scene_id; });
}

SceneMetrics MetricReport::aggregate() const
{
  if (scenes.empty()) {
    throw DomainError("MetricReport: no scenes to aggregate");
  }
  SceneMetrics mean;
  mean.scene_id = "mean";
  mean.k = scenes.front().k;
  for (const auto & s : scenes) {
    mean.min_ade += s.min_ade;
    mean.min_fde += s.min_fde;
    mean.kde_nll += s.kde_nll;
    mean.ecfl += s.ecfl;
    if (s.k != mean.k) {
      mean.k = 0;
    }
  }
  const double n = double(scenes.size());
  mean.min_ade /= n;
  mean.min_fde /= n;
  mean.kde_nll /= n;
  mean.ecfl /= n;
  return mean;
}

namespace
{

std::string fmt6(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::ordered_json scene_json(const SceneMetrics & s)
{
  nlohmann::ordered_json j;
  j["scene_id"] = s.scene_id;
  j["k"] = s.k;
  j["min_ade"] = s.min_ade;
  j["min_fde"] = s.min_fde;
  j["kde_nll"] = s.kde_nll;
  j["ecfl"] = s.ecfl;
  return j;
}

}  // namespace

std::string report_json(const MetricReport & report)
{
  nlohmann::ordered_json j;
  j["units"] = report.units;
  j["scenes"] = nlohmann::ordered_json::array();
  for (const auto & s : report.scenes) {
    j["scenes"].push_back(scene_json(s));
  }
  j["aggregate"] = scene_json(report.aggregate());
  return j.dump(2) + "\n";
}

std::string report_csv(const MetricReport & report)
{
  std::string out = "scene_id,k,min_ade,min_fde,kde_nll,ecfl\n";
  const auto row = [&out](const SceneMetrics & s) {
    out += s.scene_id + ',' + std::to_string(s.k) + ',' + fmt6(s.min_ade) + ',' +
           fmt6(s.min_fde) + ',' + fmt6(s.kde_nll) + ',' + fmt6(s.ecfl) + '\n';
  };
  for (const auto & s : report.scenes) {
    row(s);
  }
  row(report.aggregate());
  return out;
}

}  // namespace trajcast::metrics
