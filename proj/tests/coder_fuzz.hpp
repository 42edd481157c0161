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

#ifndef QVRF_TESTS_CODER_FUZZ_HPP_
#define QVRF_TESTS_CODER_FUZZ_HPP_

// Random tables and symbol/bypass streams for range-coder differential tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "qvrf/entropy_model.hpp"
#include "qvrf/range_coder.hpp"
#include "test_util.hpp"

namespace qvrf::testing {

// Window of 1..max_window symbols with a random shape: flat, peaked or
// near-certain.
inline SymbolDistribution random_table(std::mt19937_64& rng, int max_window = 300) {
  const int n = 1 + int(rng() % std::uint64_t(max_window));
  const Symbol k_min = Symbol(int(rng() % 2001) - 1000);
  std::vector<double> w(std::size_t(n) + 1);
  const int shape = int(rng() % 3);
  const int peak = int(rng() % std::uint64_t(n));
  for (int i = 0; i <= n; ++i) {
    switch (shape) {
      case 0: w[std::size_t(i)] = uniform(rng, 0.0, 1.0); break;
      case 1: w[std::size_t(i)] = std::exp(-0.1 * std::abs(i - peak) * uniform(rng, 0.5, 3.0)); break;
      default: w[std::size_t(i)] = i == peak ? 1e6 : uniform(rng, 0.0, 1.0); break;
    }
  }
  double sum = 0.0;
  for (const double v : w) sum += v;
  const std::uint32_t budget = kTotalMass - std::uint32_t(n) - 1;
  std::vector<std::uint32_t> masses(static_cast<std::size_t>(n));
  std::uint32_t used = 0;
  for (int i = 0; i < n; ++i) {
    masses[std::size_t(i)] = 1 + std::uint32_t(w[std::size_t(i)] / sum * budget);
    used += masses[std::size_t(i)];
  }
  return SymbolDistribution::from_masses(k_min, masses, kTotalMass - used);
}

// Symbol drawn from the table's own distribution; escapes become a random
// out-of-window value.
inline Symbol sample_symbol(std::mt19937_64& rng, const SymbolDistribution& d) {
  const int slot = d.find_slot(std::uint32_t(rng() % kTotalMass));
  if (slot != d.escape_slot()) return d.symbol_for(slot);
  const Symbol dist = Symbol(rng() % (1u << (1 + rng() % 20)));
  return rng() & 1 ? d.k_max() + 1 + dist : d.k_min() - 1 - dist;
}

struct RawBits {
  std::uint32_t value;
  int n_bits;
};

struct CodedSymbol {
  int table;
  Symbol k;
};

using CoderOp = std::variant<CodedSymbol, RawBits>;

struct FuzzResult {
  bool roundtrip = false;
  double ideal_bits = 0.0;
  std::size_t bytes = 0;
};

// count symbols from tables_count random tables, with a raw-bit write
// interleaved with probability raw_rate.
inline FuzzResult fuzz_stream(std::uint64_t seed, int count, int tables_count = 16,
                              double raw_rate = 0.0) {
  std::mt19937_64 rng(seed);
  std::vector<SymbolDistribution> tables;
  for (int t = 0; t < tables_count; ++t) tables.push_back(random_table(rng));
  std::vector<CoderOp> ops;
  ops.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i) {
    if (raw_rate > 0.0 && uniform01(rng) < raw_rate) {
      const int n = int(rng() % 33);
      const std::uint32_t v = n == 0 ? 0u : std::uint32_t(rng() >> (64 - n));
      ops.emplace_back(RawBits{v, n});
    } else {
      const int t = int(rng() % std::uint64_t(tables_count));
      ops.emplace_back(CodedSymbol{t, sample_symbol(rng, tables[std::size_t(t)])});
    }
  }
  RangeEncoder enc;
  for (const auto& op : ops) {
    if (const auto* s = std::get_if<CodedSymbol>(&op)) {
      encode_value(enc, tables[std::size_t(s->table)], s->k);
    } else {
      const auto& r = std::get<RawBits>(op);
      enc.encode_raw_bits(r.value, r.n_bits);
    }
  }
  FuzzResult res;
  res.ideal_bits = enc.ideal_bits();
  const auto bytes = enc.finish();
  res.bytes = bytes.size();

  RangeDecoder dec(bytes);
  res.roundtrip = true;
  for (const auto& op : ops) {
    if (const auto* s = std::get_if<CodedSymbol>(&op)) {
      if (decode_value(dec, tables[std::size_t(s->table)]) != s->k) {
        res.roundtrip = false;
        break;
      }
    } else {
      const auto& r = std::get<RawBits>(op);
      if (dec.decode_raw_bits(r.n_bits) != r.value) {
        res.roundtrip = false;
        break;
      }
    }
  }
  if (dec.bytes_consumed() != bytes.size()) res.roundtrip = false;
  return res;
}

}  // namespace qvrf::testing

#endif  // QVRF_TESTS_CODER_FUZZ_HPP_
