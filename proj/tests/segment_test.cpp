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

#include <random>

#include "oracles.hpp"
#include "retarget/segment.hpp"
#include "test_util.hpp"

namespace retarget {
namespace {

using testing::RandomImage;
using testing::RandomMap;

RasterImage HalfHalf(int w, int h) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = w / 2; x < w; ++x) {
      for (int c = 0; c < 3; ++c) data[(y * w + x) * 3 + c] = 255;
    }
  }
  return RasterImage(w, h, std::move(data));
}

// Blocky random image: piecewise constant cells with a little noise.
RasterImage BlockImage(std::mt19937& rng, int w, int h, int block) {
  std::uniform_int_distribution<int> base(0, 255);
  std::uniform_int_distribution<int> noise(-6, 6);
  std::vector<std::array<int, 3>> colors((w / block + 1) * (h / block + 1));
  for (auto& c : colors) c = {base(rng), base(rng), base(rng)};
  std::vector<std::uint8_t> data;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& c = colors[(y / block) * (w / block + 1) + x / block];
      for (int ch = 0; ch < 3; ++ch) {
        data.push_back(static_cast<std::uint8_t>(std::clamp(c[ch] + noise(rng), 0, 255)));
      }
    }
  }
  return RasterImage(w, h, std::move(data));
}

TEST(Segment, ConstantImageIsOnePatch) {
  const RasterImage img = RasterImage::Filled(4, 4, {90, 10, 200});
  const LabelGrid labels = Segment(img);
  EXPECT_EQ(labels.values().size(), 16u);
  for (int v : labels.values()) EXPECT_EQ(v, 0);
  for (double k : {1.0, 50.0, 1000.0}) {
    EXPECT_EQ(CountPatches(Segment(RasterImage::Filled(13, 7, {1, 2, 3}), {0.5, k, 1})), 1);
  }
}

TEST(Segment, HalfHalfIsTwoPatches) {
  const SegmentationParams p{0.8, 50.0, 10};
  const LabelGrid labels = Segment(HalfHalf(8, 8), p);
  EXPECT_EQ(CountPatches(labels), 2);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) EXPECT_EQ(labels.at(x, y), x < 4 ? 0 : 1);
  }
  const std::vector<int> want = oracle::NaiveSegment(HalfHalf(8, 8), 0.8, 50.0, 10);
  EXPECT_EQ(std::vector<int>(labels.values().begin(), labels.values().end()), want);
}

TEST(Segment, MatchesNaiveReference) {
  std::mt19937 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 6 + static_cast<int>(rng() % 14);
    const int h = 6 + static_cast<int>(rng() % 14);
    const RasterImage img = trial % 2 ? RandomImage(rng, w, h) : BlockImage(rng, w, h, 4);
    const SegmentationParams p{0.5 + 0.1 * (trial % 5), 100.0 + 40.0 * (trial % 4),
                               1 + trial % 7};
    const LabelGrid labels = Segment(img, p);
    const std::vector<int> want =
        oracle::NaiveSegment(img, p.smoothing_sigma, p.threshold_k, p.min_patch_size);
    ASSERT_EQ(std::vector<int>(labels.values().begin(), labels.values().end()), want)
        << "trial " << trial;
  }
}

TEST(Segment, PartitionIsTotalAndConsecutive) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const RasterImage img = BlockImage(rng, 30, 22, 5);
    const LabelGrid labels = Segment(img, {0.8, 300.0, 20});
    const int n = CountPatches(labels);
    std::vector<long> count(n, 0);
    int next = 0;
    for (int v : labels.values()) {
      ASSERT_GE(v, 0);
      ASSERT_LT(v, n);
      ASSERT_LE(v, next);  // first appearance in raster order
      if (v == next) ++next;
      ++count[v];
    }
    long total = 0;
    for (long c : count) {
      EXPECT_GE(c, 20);
      total += c;
    }
    EXPECT_EQ(total, 30 * 22);
  }
}

TEST(Segment, Deterministic) {
  std::mt19937 rng(8);
  const RasterImage img = RandomImage(rng, 25, 19);
  EXPECT_EQ(Segment(img), Segment(img));
}

TEST(Segment, MinSizeMonotone) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const RasterImage img = BlockImage(rng, 40, 30, 6);
    int last = 40 * 30 + 1;
    for (int m : {1, 5, 20, 50, 100, 400}) {
      const int n = CountPatches(Segment(img, {0.8, 300.0, m}));
      EXPECT_LE(n, last) << "min size " << m;
      last = n;
    }
  }
}

TEST(Segment, RejectsNonPositiveParams) {
  const RasterImage img = RasterImage::Filled(3, 3, {0, 0, 0});
  EXPECT_THROW(Segment(img, {0.0, 300.0, 50}), Error);
  EXPECT_THROW(Segment(img, {0.8, -1.0, 50}), Error);
  EXPECT_THROW(Segment(img, {0.8, 300.0, 0}), Error);
}

TEST(PatchEnergy, MeanOfThree) {
  const LabelGrid labels(3, 1, std::vector<int>{0, 0, 0});
  const PatchMap pm = PatchEnergy(labels, ImportanceMap(3, 1, {0.2, 0.4, 0.6}));
  ASSERT_EQ(pm.patches.size(), 1u);
  EXPECT_NEAR(pm.patches[0].omega, 0.4, 1e-15);
  EXPECT_EQ(pm.patches[0].pixel_count, 3);
}

TEST(PatchEnergy, ZeroMap) {
  std::mt19937 rng(2);
  const LabelGrid labels = Segment(RandomImage(rng, 12, 12), {0.8, 300.0, 5});
  for (const Patch& p : PatchEnergy(labels, ImportanceMap::Uniform(12, 12, 0.0)).patches) {
    EXPECT_EQ(p.omega, 0.0);
  }
}

TEST(PatchEnergy, MatchesDoubleLoop) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> ids(100);
    for (int& v : ids) v = static_cast<int>(rng() % 6);
    const LabelGrid labels(10, 10, ids);
    const ImportanceMap m = RandomMap(rng, 10, 10);
    const PatchMap pm = PatchEnergy(labels, m);
    long total = 0;
    for (const Patch& p : pm.patches) {
      double sum = 0.0;
      long cnt = 0;
      double lo = 1.0, hi = 0.0;
      for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 10; ++x) {
          if (labels.at(x, y) != p.id) continue;
          sum += m.at(x, y);
          ++cnt;
          lo = std::min(lo, m.at(x, y));
          hi = std::max(hi, m.at(x, y));
        }
      }
      EXPECT_EQ(p.pixel_count, cnt);
      EXPECT_NEAR(p.omega, sum / cnt, 1e-12);
      EXPECT_GE(p.omega, lo - 1e-15);
      EXPECT_LE(p.omega, hi + 1e-15);
      total += cnt;
    }
    EXPECT_EQ(total, 100);
    for (std::size_t i = 1; i < pm.patches.size(); ++i) {
      EXPECT_LT(pm.patches[i - 1].id, pm.patches[i].id);
    }
  }
}

TEST(PatchEnergy, DimensionMismatch) {
  try {
    PatchEnergy(LabelGrid(3, 3), ImportanceMap::Uniform(3, 4, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(PatchMap, FindById) {
  const PatchMap pm = PatchEnergy(LabelGrid(2, 1, std::vector<int>{0, 3}),
                                  ImportanceMap(2, 1, {0.25, 0.75}));
  EXPECT_EQ(pm.Find(3).omega, 0.75);
  EXPECT_THROW(pm.Find(1), Error);
}

}  // namespace
}  // namespace retarget
