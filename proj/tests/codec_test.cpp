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

#include "qvrf/codec.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "qvrf/error.hpp"
#include "qvrf/metrics.hpp"
#include "test_util.hpp"

namespace qvrf {
namespace {

using testing::load_image;
using testing::natural_image;
using testing::noise_image;

Image constant_image(int w, int h, std::uint8_t v) {
  Image img(w, h);
  std::fill(img.samples.begin(), img.samples.end(), v);
  return img;
}

std::vector<Image> corpus() {
  return {natural_image(), load_image("camera_512x512.pgm"),
          load_image("chelsea_451x300.pgm")};
}

TEST(Codec, DecoderMatchesEncoderReconstruction) {
  for (const Image& img : corpus()) {
    for (const double a : {1.0, 4.0, 10.0}) {
      const auto r = encode_image_detailed(img, Regulator(a));
      const auto bytes = r.stream.serialize();
      EXPECT_EQ(decode_image(bytes), r.reconstruction)
          << img.width << "x" << img.height << " a=" << a;
    }
  }
}

TEST(Codec, OddSizesAndBlockSizes) {
  const Image img = testing::crop(natural_image(), 100, 50, 77, 53);
  for (const int b : {4, 8, 16}) {
    const auto r = encode_image_detailed(img, Regulator(3.0), {b});
    const Image dec = decode_image(r.stream.serialize());
    EXPECT_EQ(dec, r.reconstruction);
    EXPECT_EQ(dec.width, 77);
    EXPECT_EQ(dec.height, 53);
  }
}

TEST(Codec, TruncatedLatentThrowsStreamExhausted) {
  auto bytes = encode_image(natural_image(), Regulator(4.0)).serialize();
  bytes.pop_back();
  EXPECT_THROW(decode_image(bytes), StreamExhausted);
}

TEST(Codec, HeaderErrors) {
  const auto good = encode_image(noise_image(32, 32, 1), Regulator(2.0)).serialize();
  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_image(bad), FormatError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_image(bad), FormatError);
  bad = good;
  bad[5] = 5;
  EXPECT_THROW(decode_image(bad), FormatError);
  bad = good;
  bad[6] = 1;
  EXPECT_THROW(decode_image(bad), FormatError);
  // a = 100 is out of bounds.
  bad = good;
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(100.0f);
  for (int i = 0; i < 4; ++i) bad[std::size_t(16 + i)] = std::uint8_t(bits >> (24 - 8 * i));
  EXPECT_THROW(decode_image(bad), FormatError);
  const std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 10);
  EXPECT_THROW(decode_image(short_header), StreamExhausted);
  bad = good;
  bad[23] = 0xFF;
  EXPECT_THROW(decode_image(bad), StreamExhausted);
}

TEST(Codec, HeaderLayoutAndRegulatorBits) {
  const Image img = noise_image(30, 20, 3);
  const Regulator a(2.7182818284);
  const auto bs = encode_image(img, a);
  const auto bytes = bs.serialize();
  EXPECT_EQ(bytes[0], 'Q');
  EXPECT_EQ(bytes[3], 'F');
  EXPECT_EQ(bytes[4], kFormatVersion);
  EXPECT_EQ(bytes[5], 8);
  EXPECT_EQ(bytes[6], 2);
  EXPECT_EQ(bytes[7], 4);
  EXPECT_EQ(bytes[11], 30);
  EXPECT_EQ(bytes[15], 20);
  const auto parsed = Bitstream::parse(bytes);
  EXPECT_EQ(parsed.header, bs.header);
  EXPECT_EQ(parsed.header.a_bits, std::bit_cast<std::uint32_t>(2.7182818284f));
  EXPECT_EQ(parsed.header.a(), double(2.7182818284f));
  EXPECT_EQ(parsed.serialize(), bytes);
}

TEST(Codec, LatentBitsTrackIdealCost) {
  const Image img = natural_image();
  for (const double a : {0.25, 1.0, 4.0, 10.0, 32.0}) {
    const auto r = encode_image_detailed(img, Regulator(a));
    const double bits = 8.0 * double(r.stream.latent.size());
    EXPECT_LE(std::fabs(bits - r.latent_ideal_bits),
              8.0 * kCoderOverheadBytes + 0.01 * r.latent_ideal_bits)
        << "a=" << a;
  }
}

// Every AC band of a constant image sits at the scale floor, so its cost is
// that of symbol 0 under the floor table: nearly nothing for a <= 1, and
// growing with a as the floor table widens.
TEST(Codec, ConstantImageCostsTheScaleFloor) {
  const Image img = constant_image(256, 256, 77);
  const auto side = encode_image(img, Regulator(1.0)).side;
  for (const double a : {0.25, 0.5, 1.0, 4.0, 32.0}) {
    const auto r = encode_image_detailed(img, Regulator(a));
    EXPECT_EQ(r.stream.side, side);
    if (a <= 1.0) {
      EXPECT_LE(r.stream.latent.size(), 16u) << "a=" << a;
    }
    const auto floor_table = build_symbol_table(GaussianParams(0.0, kSigmaMin), Regulator(a));
    const double ac_bits = 63.0 * 32.0 * 32.0 * floor_table.cost_bits(floor_table.slot_for(0));
    const auto dc_table = band_tables(prepare_image(img).scales, header_regulator(Regulator(a)))[0];
    RangeEncoder dc;
    for (const Symbol k : r.latent.symbols[0]) encode_value(dc, dc_table, k);
    const double dc_bits = dc.ideal_bits();
    EXPECT_NEAR(r.latent_ideal_bits, ac_bits + dc_bits, 1e-6 * r.latent_ideal_bits) << "a=" << a;
    EXPECT_EQ(decode_image(r.stream), r.reconstruction);
  }
}

// Full-contrast blocks push the DC residual scale past what a 4096-symbol
// window can cover at high a; the codec must still round-trip.
TEST(Codec, ExtremeContrastAtMaximumRegulator) {
  Image img(256, 256);
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) img.at(x, y) = ((x / 16 + y / 16) % 2) ? 255 : 0;
  }
  for (const int b : {8, 16}) {
    const auto r = encode_image_detailed(img, Regulator(kDefaultAMax), {b});
    EXPECT_EQ(decode_image(r.stream.serialize()), r.reconstruction);
    EXPECT_EQ(r.reconstruction, img);
  }
}

TEST(Codec, SideSegmentIndependentOfRegulator) {
  const Image img = natural_image();
  const auto s1 = encode_image(img, Regulator(1.0));
  const auto s8 = encode_image(img, Regulator(8.0));
  EXPECT_EQ(s1.side, s8.side);
  EXPECT_EQ(account_bits(s1).side_bpp, account_bits(s8).side_bpp);
}

TEST(Codec, BreakdownReconcilesWithLength) {
  const Image img = load_image("chelsea_451x300.pgm");
  const auto bs = encode_image(img, Regulator(5.0));
  const auto b = account_bits(bs);
  const double pixels = 451.0 * 300.0;
  EXPECT_DOUBLE_EQ(b.total_bpp * pixels / 8.0, double(bs.serialize().size()));
  EXPECT_NEAR(b.total_bpp, b.latent_bpp + b.side_bpp + b.header_bpp, 1e-12);
  EXPECT_GE(b.latent_bpp, 0.0);
}

TEST(Codec, LatentErrorBoundAndParseval) {
  // Dimensions are block multiples so no pixel is cropped away.
  const Image img = testing::crop(natural_image(), 0, 0, 256, 192);
  for (const double a : {0.5, 2.0, 10.0}) {
    const auto prep = prepare_image(img);
    const Regulator ra = header_regulator(Regulator(a));
    const auto q = quantize_latent(prep.bands, ra);
    EXPECT_LE(q.max_abs_error, 1.0 / (2.0 * ra.value()) + 1e-12);
    const auto real = inverse_unclipped(q.dequantized);
    double pixel_se = 0.0;
    for (std::size_t i = 0; i < real.size(); ++i) {
      const double d = real[i] - img.samples[i];
      pixel_se += d * d;
    }
    const double latent_se = q.squared_error * kDefaultLatentStep * kDefaultLatentStep;
    EXPECT_NEAR(pixel_se / latent_se, 1.0, 1e-9) << "a=" << a;
  }
}

TEST(Codec, RateIncreasesWithRegulator) {
  const Image img = natural_image();
  double prev_bits = 0.0;
  for (const double a : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double bits = double(encode_image(img, Regulator(a)).latent.size());
    EXPECT_GT(bits, prev_bits) << "a=" << a;
    prev_bits = bits;
  }
}

TEST(Codec, EncodingIsDeterministic) {
  const Image img = load_image("camera_512x512.pgm");
  EXPECT_EQ(encode_image(img, Regulator(3.3)).serialize(),
            encode_image(img, Regulator(3.3)).serialize());
}

TEST(Codec, RejectsNonDefaultLatentStep) {
  EXPECT_THROW(encode_image(noise_image(16, 16, 1), Regulator(1.0), {8, 32.0}),
               ConfigError);
}

TEST(Codec, RegulatorOutOfBoundsRejected) {
  EXPECT_THROW(encode_image(noise_image(16, 16, 1), Regulator(40.0)), ConfigError);
}

}  // namespace
}  // namespace qvrf
