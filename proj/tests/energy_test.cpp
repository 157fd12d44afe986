// Copyright 2026 The Retarget Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "retarget/energy.hpp"
#include "retarget/image_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace retarget {
namespace {

using testing::RandomImage;
using testing::TempDir;

TEST(GradientEnergy, ConstantImageIsZero) {
  const ImportanceMap e = GradientEnergy(RasterImage::Filled(4, 4, {90, 20, 200}));
  for (double v : e.values()) EXPECT_EQ(v, 0.0);
}

TEST(GradientEnergy, HandStencil) {
  ScalarGrid lum(2, 2, std::vector<double>{0, 10, 0, 10});
  const ScalarGrid raw = RawGradientEnergy(lum);
  EXPECT_EQ(raw.at(0, 0), 10.0);
  EXPECT_EQ(raw.at(1, 0), 0.0);
  EXPECT_EQ(raw.at(0, 1), 10.0);
  EXPECT_EQ(raw.at(1, 1), 0.0);
  // The same grid as gray pixels: luminance of (v,v,v) is v.
  const RasterImage img(2, 2, {0, 0, 0, 10, 10, 10, 0, 0, 0, 10, 10, 10});
  const ImportanceMap e = GradientEnergy(img);
  EXPECT_NEAR(e.at(0, 0), 10.0 / 510.0, 1e-15);
  EXPECT_EQ(e.at(1, 0), 0.0);
  EXPECT_NEAR(e.at(0, 1), 10.0 / 510.0, 1e-15);
  EXPECT_EQ(e.at(1, 1), 0.0);
}

TEST(GradientEnergy, MatchesStencilOracle) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const RasterImage img = RandomImage(rng, 8, 8);
    const ImportanceMap e = GradientEnergy(img);
    const std::vector<double> want = oracle::GradientStencil(img);
    for (std::size_t i = 0; i < want.size(); ++i) {
      ASSERT_EQ(e.values()[i], want[i]) << "pixel " << i;
    }
  }
}

TEST(GradientEnergy, DimensionsAndRange) {
  std::mt19937 rng(1);
  for (int w = 1; w <= 6; ++w) {
    for (int h = 1; h <= 6; ++h) {
      const ImportanceMap e = GradientEnergy(RandomImage(rng, w, h));
      EXPECT_EQ(e.size(), (Size{w, h}));
      for (double v : e.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
  // Extreme contrast reaches the top of the range.
  const RasterImage checker(2, 2, {255, 255, 255, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  EXPECT_NEAR(GradientEnergy(checker).at(0, 0), 1.0, 1e-12);
}

TEST(GradientEnergy, TranslationEquivariantAwayFromBorders) {
  std::mt19937 rng(9);
  const RasterImage img = RandomImage(rng, 10, 7);
  std::vector<std::uint8_t> shifted(img.data().size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb p = img.pixel(std::max(x - 1, 0), y);
      std::copy(p.begin(), p.end(), shifted.begin() + (y * img.width() + x) * 3);
    }
  }
  const ImportanceMap a = GradientEnergy(img);
  const ImportanceMap b = GradientEnergy(RasterImage(img.width(), img.height(), shifted));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x + 2 < img.width(); ++x) {
      EXPECT_EQ(b.at(x + 1, y), a.at(x, y)) << x << "," << y;
    }
  }
}

TEST(EnergyForIteration, GradientDelegates) {
  std::mt19937 rng(2);
  const RasterImage img = RandomImage(rng, 5, 4);
  EXPECT_EQ(EnergyForIteration(EnergyProvider::Gradient(), img, nullptr), GradientEnergy(img));
  // Recompute mode ignores anything carried.
  const ImportanceMap other = ImportanceMap::Uniform(5, 4, 0.3);
  EXPECT_EQ(EnergyForIteration(EnergyProvider::Gradient(), img, &other), GradientEnergy(img));
}

TEST(EnergyForIteration, CarryReturnsCarried) {
  std::mt19937 rng(2);
  const RasterImage img = RandomImage(rng, 5, 4);
  const ImportanceMap m = testing::RandomMap(rng, 5, 4);
  const EnergyProvider p = EnergyProvider::StaticMap(ImportanceMap::Uniform(5, 4, 0.0));
  EXPECT_TRUE(p.carries());
  EXPECT_EQ(EnergyForIteration(p, img, &m), m);
  const ImportanceMap wrong = ImportanceMap::Uniform(4, 4, 0.0);
  EXPECT_THROW(EnergyForIteration(p, img, &wrong), Error);
}

TEST(EnergyProvider, StaticMapFromFile) {
  TempDir dir;
  SaveImportance(dir / "m.pgm", ImportanceMap::Uniform(3, 2, 1.0));
  const EnergyProvider p = EnergyProvider::StaticMap(dir / "m.pgm");
  EXPECT_EQ(p.Compute(RasterImage::Filled(3, 2, {0, 0, 0})), ImportanceMap::Uniform(3, 2, 1.0));
  try {
    p.Compute(RasterImage::Filled(4, 2, {0, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

void WriteScript(const std::filesystem::path& p, const std::string& body) {
  {
    std::ofstream f(p);
    f << "#!/bin/sh\n" << body << "\n";
  }
  std::filesystem::permissions(p, std::filesystem::perms::owner_all);
}

TEST(EnergyProvider, CommandProtocol) {
  const char* cli = std::getenv("RETARGET_CLI");
  if (cli == nullptr) GTEST_SKIP() << "RETARGET_CLI not set";
  TempDir dir;
  WriteScript(dir / "provider.sh", std::string("exec '") + cli + "' energy --in \"$1\" --out \"$2\"");
  std::mt19937 rng(4);
  const RasterImage img = RandomImage(rng, 6, 5);
  const ImportanceMap got =
      EnergyProvider::Command((dir / "provider.sh").string()).Compute(img);
  const ImportanceMap want = GradientEnergy(img);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.values().size(); ++i) {
    EXPECT_LE(std::abs(got.values()[i] - want.values()[i]), 0.5 / 255.0 + 1e-12);
  }
}

TEST(EnergyProvider, CommandWrongSizeIsProviderFailure) {
  TempDir dir;
  WriteScript(dir / "bad.sh", "printf 'P5\\n1 1\\n255\\n\\200' > \"$2\"");
  try {
    EnergyProvider::Command((dir / "bad.sh").string()).Compute(RasterImage::Filled(3, 3, {1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderFailure);
  }
}

TEST(EnergyProvider, CommandNonZeroExitIsProviderFailure) {
  TempDir dir;
  WriteScript(dir / "fail.sh", "exit 4");
  try {
    EnergyProvider::Command((dir / "fail.sh").string()).Compute(RasterImage::Filled(3, 3, {1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderFailure);
  }
}

}  // namespace
}  // namespace retarget
