// Copyright 2026 The dexgrasp Authors
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

#include "dexgrasp/random.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dexgrasp {
namespace {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Acklam's rational approximation refined by one Halley step.
double NormalQuantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  p = std::clamp(p, 1e-300, 1.0 - 1e-16);
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - 0.02425) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = NormalCdf(x) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

}  // namespace

uint64_t MixSeed(uint64_t value) {
  uint64_t z = value + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double StandardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

double TruncatedNormal(Rng& rng, double mean, double sigma, double lo, double hi) {
  if (!(lo < hi)) throw Error("truncated normal needs lo < hi");
  if (!(sigma > 0.0)) return std::clamp(mean, lo, hi);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double x = mean + sigma * StandardNormal(rng);
    if (x >= lo && x <= hi) return x;
  }
  const double cdf_lo = NormalCdf((lo - mean) / sigma);
  const double cdf_hi = NormalCdf((hi - mean) / sigma);
  const double u = Uniform(rng, cdf_lo, cdf_hi);
  return std::clamp(mean + sigma * NormalQuantile(u), lo, hi);
}

Vec3 RandomUnitVector(Rng& rng) {
  for (;;) {
    Vec3 v(StandardNormal(rng), StandardNormal(rng), StandardNormal(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Quat RandomRotation(Rng& rng) {
  Eigen::Vector4d v;
  do {
    for (int i = 0; i < 4; ++i) v[i] = StandardNormal(rng);
  } while (v.norm() < 1e-12);
  v.normalize();
  return Quat(v[0], v[1], v[2], v[3]);
}

Vec3 AnyOrthogonal(const Vec3& v) {
  const Vec3 helper = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return v.cross(helper).normalized();
}

Vec3 RandomDirectionInCone(Rng& rng, const Vec3& axis, double half_angle) {
  const Vec3 a = axis.normalized();
  if (half_angle <= 0.0) return a;
  const double cos_max = std::cos(half_angle);
  const double z = Uniform(rng, cos_max, 1.0);
  const double phi = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Vec3 u = AnyOrthogonal(a);
  const Vec3 w = a.cross(u);
  return (z * a + s * (std::cos(phi) * u + std::sin(phi) * w)).normalized();
}

}  // namespace dexgrasp
