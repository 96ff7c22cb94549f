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

#ifndef TRAJCAST__CORE__RNG_HPP_
#define TRAJCAST__CORE__RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace trajcast
{

// 64-bit FNV-1a. Used for config hashes, checkpoint hashes and seed
// derivation; chosen because the value must be stable across platforms
// and releases, which rules out std::hash.
inline std::uint64_t fnv1a64(const void * data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL)
{
  const auto * p = static_cast<const unsigned char *>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::uint64_t>(p[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL)
{
  return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t splitmix64(std::uint64_t & state)
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with splitmix64 seeding. Self-contained so that every stream
// the project draws is reproducible bit for bit, independent of the standard
// library implementation.
class Rng
{
public:
  Rng() : Rng(0) {}

  explicit Rng(std::uint64_t seed)
  {
    std::uint64_t sm = seed;
    for (auto & w : s_) {
      w = splitmix64(sm);
    }
  }

  // Stable child stream derivation: mixes a textual tag and two indices into
  // the parent seed. Children with distinct (tag, a, b) never collide in
  // practice and are independent of draw order on the parent.
  static Rng derive(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                    std::uint64_t b = 0)
  {
    std::uint64_t h = fnv1a64(tag);
    h = fnv1a64(&seed, sizeof(seed), h);
    h = fnv1a64(&a, sizeof(a), h);
    h = fnv1a64(&b, sizeof(b), h);
    return Rng(h);
  }

  std::uint64_t next_u64()
  {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi] inclusive, by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
  {
    if (hi < lo) {
      throw std::invalid_argument("uniform_int: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {
      return static_cast<std::int64_t>(next_u64());
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v = next_u64();
    while (v >= limit) {
      v = next_u64();
    }
    return lo + static_cast<std::int64_t>(v % span);
  }

  // Standard normal via Box-Muller; the paired deviate is cached.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) {
      u1 = uniform01();
    }
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Marsaglia-Tsang for alpha >= 1, boosted for alpha < 1.
  double gamma(double alpha)
  {
    if (alpha <= 0.0) {
      throw std::invalid_argument("gamma: alpha must be positive");
    }
    if (alpha < 1.0) {
      const double u = uniform01();
      return gamma(alpha + 1.0) * std::pow(u > 0.0 ? u : 1e-300, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) {
        continue;
      }
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) {
        return d * v;
      }
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }

  std::vector<double> dirichlet(const std::vector<double> & alphas)
  {
    std::vector<double> g(alphas.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      g[i] = gamma(alphas[i]);
      sum += g[i];
    }
    if (sum <= 0.0) {
      sum = 1.0;
    }
    for (auto & v : g) {
      v /= sum;
    }
    return g;
  }

  // Fisher-Yates over indices 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n)
  {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = i;
    }
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

  std::array<std::uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<std::uint64_t, 4> & s)
  {
    s_ = s;
    has_spare_ = false;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
  double spare_{0.0};
  bool has_spare_{false};
};

}  // namespace trajcast

#endif  // TRAJCAST__CORE__RNG_HPP_
