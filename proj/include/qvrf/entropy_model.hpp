// Copyright 2026 The qvrf Authors. All Rights Reserved.
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

#ifndef QVRF_ENTROPY_MODEL_HPP_
#define QVRF_ENTROPY_MODEL_HPP_

// Gaussian conditional probability masses for latent coefficients quantized
// with bin size 1/a, and their fixed-point realization for the range coder.
//
// Two equivalent forms are provided. pmf_direct integrates N(mu, sigma) over
// [k/a - 1/(2a), k/a + 1/(2a)]. pmf_reparam scales the latent and both
// Gaussian parameters by a and integrates N(a*mu, a*sigma) over
// [k - 1/2, k + 1/2], which is what a plain round quantizer needs. The coder
// path uses the reparameterized form only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qvrf/error.hpp"

namespace qvrf {

using Symbol = std::int32_t;

// Floor on the Gaussian scale, in latent units.
inline constexpr double kSigmaMin = 0.11;
inline constexpr double kDefaultAMin = 0.25;
inline constexpr double kDefaultAMax = 32.0;

// Fixed-point table parameters.
inline constexpr int kPrecisionBits = 16;
inline constexpr std::uint32_t kTotalMass = 1u << kPrecisionBits;
inline constexpr double kTailFactor = 6.0;
inline constexpr int kMaxWindow = 4096;

// |a*y| beyond this is not encodable.
inline constexpr double kMaxSymbolMagnitude = double(1 << 30);

class GaussianParams {
 public:
  GaussianParams(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma)) {
      throw ConfigError("GaussianParams: non-finite mean or scale");
    }
    sigma_ = std::max(sigma, kSigmaMin);
  }

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

 private:
  double mu_;
  double sigma_;
};

struct RegulatorBounds {
  double min = kDefaultAMin;
  double max = kDefaultAMax;
};

// The univariate quantization regulator. Quantization bin size is 1/a.
class Regulator {
 public:
  explicit Regulator(double a, RegulatorBounds bounds = {}) : a_(a) {
    if (!(bounds.min > 0.0) || !(bounds.max >= bounds.min)) {
      throw ConfigError("Regulator: invalid bounds");
    }
    if (!std::isfinite(a) || a < bounds.min || a > bounds.max) {
      throw ConfigError("Regulator: a=" + std::to_string(a) +
                        " outside [" + std::to_string(bounds.min) + ", " +
                        std::to_string(bounds.max) + "]");
    }
  }

  double value() const { return a_; }

 private:
  double a_;
};

// Standard normal CDF. std::erfc is accurate to a few ulp over the whole
// real line, well inside a 1e-12 absolute error budget.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

namespace detail {

// Mass of the standard normal between two z-scores. Evaluated on the lower
// tail whenever both ends sit above zero so the difference never cancels
// against 1.
inline double normal_interval_mass(double z_lo, double z_hi) {
  const double m = z_lo > 0.0 ? std_normal_cdf(-z_lo) - std_normal_cdf(-z_hi)
                              : std_normal_cdf(z_hi) - std_normal_cdf(z_lo);
  return std::clamp(m, 0.0, 1.0);
}

}  // namespace detail

inline double pmf_direct(Symbol k, const GaussianParams& p, const Regulator& a) {
  const double av = a.value();
  const double center = double(k) / av;
  const double half = 1.0 / (2.0 * av);
  return detail::normal_interval_mass((center - half - p.mu()) / p.sigma(),
                                      (center + half - p.mu()) / p.sigma());
}

inline double pmf_reparam(Symbol k, const GaussianParams& p,
                          const Regulator& a) {
  const double av = a.value();
  const double mu = av * p.mu();
  const double sigma = av * p.sigma();
  return detail::normal_interval_mass((double(k) - 0.5 - mu) / sigma,
                                      (double(k) + 0.5 - mu) / sigma);
}

// k = round(a*y), ties away from zero.
inline Symbol quantize(double y, const Regulator& a) {
  const double scaled = a.value() * y;
  if (!std::isfinite(scaled) || std::fabs(scaled) > kMaxSymbolMagnitude) {
    throw ConfigError("quantize: coefficient not encodable");
  }
  return static_cast<Symbol>(std::round(scaled));
}

inline double dequantize(Symbol k, const Regulator& a) {
  return double(k) / a.value();
}

// Integer CDF over the symbol window [k_min, k_max] plus one trailing escape
// slot that carries every out-of-window symbol. Slot i < window_size() holds
// symbol k_min + i; slot window_size() is the escape.
class SymbolDistribution {
 public:
  // masses: one entry per in-window symbol, each >= 1; together with
  // escape_mass (>= 1) they must sum to kTotalMass.
  static SymbolDistribution from_masses(Symbol k_min,
                                        const std::vector<std::uint32_t>& masses,
                                        std::uint32_t escape_mass) {
    if (masses.empty() || masses.size() > std::size_t(kMaxWindow)) {
      throw ConfigError("SymbolDistribution: bad window size");
    }
    SymbolDistribution d;
    d.k_min_ = k_min;
    d.k_max_ = k_min + Symbol(masses.size()) - 1;
    d.cdf_.resize(masses.size() + 2);
    d.cdf_[0] = 0;
    std::uint64_t run = 0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      if (masses[i] == 0) throw ConfigError("SymbolDistribution: zero mass");
      run += masses[i];
      d.cdf_[i + 1] = static_cast<std::uint32_t>(std::min<std::uint64_t>(run, kTotalMass + 1));
    }
    if (escape_mass == 0) throw ConfigError("SymbolDistribution: zero escape");
    run += escape_mass;
    if (run != kTotalMass) {
      throw ConfigError("SymbolDistribution: masses do not sum to 2^16");
    }
    d.cdf_.back() = kTotalMass;
    d.remainder_slot_ = 0;
    for (int i = 1; i < d.slot_count(); ++i) {
      if (d.mass(i) > d.mass(d.remainder_slot_)) d.remainder_slot_ = i;
    }
    return d;
  }

  Symbol k_min() const { return k_min_; }
  Symbol k_max() const { return k_max_; }
  int window_size() const { return int(k_max_ - k_min_) + 1; }
  int escape_slot() const { return window_size(); }
  int slot_count() const { return window_size() + 1; }
  // Symbol value returned by the decoder for the escape slot.
  Symbol escape_symbol() const { return k_max_ + 1; }

  bool in_window(Symbol k) const { return k >= k_min_ && k <= k_max_; }

  int slot_for(Symbol k) const {
    return in_window(k) ? int(k - k_min_) : escape_slot();
  }
  Symbol symbol_for(int slot) const {
    return slot == escape_slot() ? escape_symbol() : k_min_ + Symbol(slot);
  }

  std::uint32_t cumulative(int slot) const { return cdf_[std::size_t(slot)]; }
  std::uint32_t mass(int slot) const {
    return cdf_[std::size_t(slot) + 1] - cdf_[std::size_t(slot)];
  }
  std::uint32_t escape_mass() const { return mass(escape_slot()); }
  // Most probable slot (lowest index on ties). The range coder hands it the
  // part of the range lost to integer division.
  int remainder_slot() const { return remainder_slot_; }

  // Slot whose interval [cdf[s], cdf[s+1]) contains value.
  int find_slot(std::uint32_t value) const {
    const auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), value);
    return int(it - cdf_.begin()) - 1;
  }

  double cost_bits(int slot) const {
    return double(kPrecisionBits) - std::log2(double(mass(slot)));
  }

  const std::vector<std::uint32_t>& cdf() const { return cdf_; }

  // Big-endian k_min, k_max, then every cdf entry.
  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out;
    auto put = [&out](std::uint32_t v) {
      for (int s = 24; s >= 0; s -= 8) out.push_back(std::uint8_t(v >> s));
    };
    put(static_cast<std::uint32_t>(k_min_));
    put(static_cast<std::uint32_t>(k_max_));
    for (const auto c : cdf_) put(c);
    return out;
  }

  friend bool operator==(const SymbolDistribution&,
                         const SymbolDistribution&) = default;

 private:
  SymbolDistribution() = default;

  Symbol k_min_ = 0;
  Symbol k_max_ = 0;
  int remainder_slot_ = 0;
  std::vector<std::uint32_t> cdf_;
};

// Fixed-point table for k = round(a*y) with y ~ N(mu, sigma). The window
// covers a*mu +- kTailFactor*a*sigma. Each in-window slot gets its rounded
// mass (at least 1), the escape slot gets the rounded out-of-window tail (at
// least 1), and the rounding residue is spread one unit at a time over the
// slots in descending mass order.
inline SymbolDistribution build_symbol_table(const GaussianParams& p,
                                             const Regulator& a) {
  const double center = a.value() * p.mu();
  const double spread = kTailFactor * a.value() * p.sigma();
  const double lo = std::floor(center - spread);
  const double hi = std::ceil(center + spread);
  if (!(hi - lo + 1.0 <= double(kMaxWindow))) {
    throw ConfigError("build_symbol_table: window of " +
                      std::to_string(hi - lo + 1.0) + " symbols exceeds " +
                      std::to_string(kMaxWindow));
  }
  const Symbol k_min = static_cast<Symbol>(lo);
  const std::size_t n = static_cast<std::size_t>(hi - lo) + 1;

  std::vector<double> prob(n);
  double in_window = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prob[i] = pmf_reparam(k_min + Symbol(i), p, a);
    in_window += prob[i];
  }

  const double scale = double(kTotalMass);
  std::vector<std::uint32_t> masses(n);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    masses[i] = static_cast<std::uint32_t>(
        std::max<long long>(1, std::llround(prob[i] * scale)));
    sum += masses[i];
  }
  const auto escape = static_cast<std::uint32_t>(std::max<long long>(
      1, std::llround(std::max(0.0, 1.0 - in_window) * scale)));

  std::int64_t residue = std::int64_t(kTotalMass) - std::int64_t(escape) - sum;
  if (residue != 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return masses[x] > masses[y];
    });
    const int step = residue > 0 ? 1 : -1;
    while (residue != 0) {
      bool moved = false;
      for (const std::size_t i : order) {
        if (residue == 0) break;
        if (step < 0 && masses[i] <= 1) continue;
        masses[i] = std::uint32_t(std::int64_t(masses[i]) + step);
        residue -= step;
        moved = true;
      }
      if (!moved) throw ConfigError("build_symbol_table: cannot normalize");
    }
  }
  return SymbolDistribution::from_masses(k_min, masses, escape);
}

}  // namespace qvrf

#endif  // QVRF_ENTROPY_MODEL_HPP_
