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

#include "qvrf/range_coder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "coder_fuzz.hpp"
#include "qvrf/entropy_model.hpp"
#include "qvrf/error.hpp"

namespace qvrf {
namespace {

using testing::fuzz_stream;
using testing::random_table;

SymbolDistribution gaussian_table(double mu, double sigma, double a) {
  return build_symbol_table(GaussianParams(mu, sigma), Regulator(a));
}

TEST(RangeCoder, EmptyStreamIsFlushOnly) {
  RangeEncoder enc;
  const auto bytes = enc.finish();
  EXPECT_LE(bytes.size(), kCoderOverheadBytes);
}

TEST(RangeCoder, NearCertainSymbolCostsAlmostNothing) {
  const auto d = SymbolDistribution::from_masses(0, {kTotalMass - 2, 1}, 1);
  RangeEncoder enc;
  for (int i = 0; i < 1000; ++i) enc.encode_symbol(d, 0);
  const auto bytes = enc.finish();
  EXPECT_LE(bytes.size(), kCoderOverheadBytes);
  RangeDecoder dec(bytes);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(dec.decode_symbol(d), 0);
}

TEST(RangeCoder, RawBitsEdgeValues) {
  RangeEncoder enc;
  enc.encode_raw_bits(0, 1);
  enc.encode_raw_bits(1, 1);
  enc.encode_raw_bits((1u << 31) - 1, 31);
  enc.encode_raw_bits(0xFFFFFFFFu, 32);
  enc.encode_raw_bits(0, 0);
  enc.encode_raw_bits(0x12345u, 17);
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  EXPECT_EQ(dec.decode_raw_bits(1), 0u);
  EXPECT_EQ(dec.decode_raw_bits(1), 1u);
  EXPECT_EQ(dec.decode_raw_bits(31), (1u << 31) - 1);
  EXPECT_EQ(dec.decode_raw_bits(32), 0xFFFFFFFFu);
  EXPECT_EQ(dec.decode_raw_bits(0), 0u);
  EXPECT_EQ(dec.decode_raw_bits(17), 0x12345u);
}

TEST(RangeCoder, RawBitsRejectOversizedValues) {
  RangeEncoder enc;
  EXPECT_THROW(enc.encode_raw_bits(2, 1), ConfigError);
  EXPECT_THROW(enc.encode_raw_bits(0, 33), ConfigError);
  EXPECT_THROW(enc.encode_raw_bits(0, -1), ConfigError);
}

TEST(RangeCoder, SymbolOutsideContractThrows) {
  const auto d = SymbolDistribution::from_masses(-2, {100, 200, 300, 400, 500},
                                                 kTotalMass - 1500);
  RangeEncoder enc;
  EXPECT_THROW(enc.encode_symbol(d, -4), ConfigError);
  EXPECT_THROW(enc.encode_symbol(d, 4), ConfigError);
  EXPECT_NO_THROW(enc.encode_symbol(d, -3));
  EXPECT_NO_THROW(enc.encode_symbol(d, 3));
}

TEST(RangeCoder, LowerSentinelDecodesAsEscape) {
  const auto d = SymbolDistribution::from_masses(-2, {100, 200, 300, 400, 500},
                                                 kTotalMass - 1500);
  RangeEncoder enc;
  enc.encode_symbol(d, d.k_min() - 1);
  enc.encode_symbol(d, 1);
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  EXPECT_EQ(dec.decode_symbol(d), d.escape_symbol());
  EXPECT_EQ(dec.decode_symbol(d), 1);
}

TEST(RangeCoder, EscapeRoundTripsFarValues) {
  const auto d = gaussian_table(0.0, 1.0, 1.0);
  const std::vector<Symbol> values = {
      0, d.k_max(), d.k_max() + 1, d.k_min() - 1, d.k_max() + 2, 1000, -1000,
      (1 << 30) - 1, -(1 << 30) + 1, 1 << 30, -(1 << 30)};
  RangeEncoder enc;
  for (const Symbol k : values) encode_value(enc, d, k);
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (const Symbol k : values) EXPECT_EQ(decode_value(dec, d), k);
}

TEST(RangeCoder, GaussianStreamRoundTrip) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::pair<double, Symbol>> data;
  RangeEncoder enc;
  for (int i = 0; i < 20000; ++i) {
    const double sigma = 0.2 + 3.0 * testing::uniform01(rng);
    const double y = sigma * normal(rng);
    const Regulator a(2.0);
    const Symbol k = quantize(y, a);
    encode_value(enc, gaussian_table(0.0, sigma, 2.0), k);
    data.emplace_back(sigma, k);
  }
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (const auto& [sigma, k] : data) {
    ASSERT_EQ(decode_value(dec, gaussian_table(0.0, sigma, 2.0)), k);
  }
  EXPECT_EQ(dec.bytes_consumed(), bytes.size());
}

TEST(RangeCoder, InterleavedRawBitsFuzz) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = fuzz_stream(seed, 2000, 8, 0.2);
    ASSERT_TRUE(r.roundtrip) << "seed " << seed;
  }
}

TEST(RangeCoder, SizeTracksIdealCost) {
  for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
    const auto r = fuzz_stream(seed, 10000);
    ASSERT_TRUE(r.roundtrip);
    const double bits = 8.0 * double(r.bytes);
    EXPECT_LE(std::fabs(bits - r.ideal_bits), 64.0 + 0.01 * r.ideal_bits)
        << "seed " << seed;
  }
}

TEST(RangeCoder, TruncatedStreamThrows) {
  std::mt19937_64 rng(3);
  const auto d = random_table(rng);
  RangeEncoder enc;
  std::vector<Symbol> ks;
  for (int i = 0; i < 3000; ++i) {
    ks.push_back(testing::sample_symbol(rng, d));
    encode_value(enc, d, ks.back());
  }
  auto bytes = enc.finish();
  bytes.pop_back();
  auto decode_all = [&] {
    RangeDecoder dec(bytes);
    for (std::size_t i = 0; i < ks.size(); ++i) decode_value(dec, d);
  };
  EXPECT_THROW(decode_all(), StreamExhausted);
}

TEST(RangeCoder, EncodingIsDeterministic) {
  std::mt19937_64 rng(11);
  const auto d = random_table(rng);
  std::vector<Symbol> ks;
  for (int i = 0; i < 5000; ++i) ks.push_back(testing::sample_symbol(rng, d));
  auto run = [&] {
    RangeEncoder enc;
    for (const Symbol k : ks) encode_value(enc, d, k);
    return enc.finish();
  };
  EXPECT_EQ(run(), run());
}

TEST(RangeCoder, EmptyInputThrowsOnConstruction) {
  const std::vector<std::uint8_t> bytes = {1, 2};
  EXPECT_THROW(RangeDecoder dec(bytes), StreamExhausted);
}

}  // namespace
}  // namespace qvrf
