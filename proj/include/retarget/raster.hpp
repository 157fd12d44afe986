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

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "retarget/error.hpp"

namespace retarget {

struct Size {
  int width = 0;
  int height = 0;

  friend bool operator==(const Size&, const Size&) = default;
};

inline std::string ToString(Size s) {
  return std::to_string(s.width) + "x" + std::to_string(s.height);
}

// Dense row-major grid of scalars. Used for luminance, raw energies and
// other scratch planes; not validated beyond its dimensions.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw Error(ErrorCode::kInvalidArgument, "grid data length mismatch");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  Size size() const { return {width_, height_}; }

  T& at(int x, int y) { return data_[Index(x, y)]; }
  const T& at(int x, int y) const { return data_[Index(x, y)]; }

  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ScalarGrid = Grid<double>;

using Rgb = std::array<std::uint8_t, 3>;

// Interleaved 8-bit RGB raster, origin top-left, rows top to bottom.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  RasterImage(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::kZeroDimension,
                  "image must be at least 1x1, got " + ToString(size()));
    }
    if (data_.size() !=
        static_cast<std::size_t>(width) * height * kChannels) {
      throw Error(ErrorCode::kInvalidArgument, "image data length mismatch");
    }
  }

  static RasterImage Filled(int width, int height, Rgb color) {
    std::vector<std::uint8_t> data(
        static_cast<std::size_t>(width) * height * kChannels);
    for (std::size_t i = 0; i < data.size(); i += kChannels) {
      std::copy(color.begin(), color.end(), data.begin() + i);
    }
    return RasterImage(width, height, std::move(data));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return kChannels; }
  Size size() const { return {width_, height_}; }

  std::uint8_t at(int x, int y, int c) const { return data_[Offset(x, y) + c]; }
  Rgb pixel(int x, int y) const {
    const std::size_t o = Offset(x, y);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }

  std::span<const std::uint8_t> data() const { return data_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t Offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Per-pixel importance in [0,1].
class ImportanceMap {
 public:
  ImportanceMap() = default;
  ImportanceMap(int width, int height, std::vector<double> values)
      : grid_(width, height, std::move(values)) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::kZeroDimension, "importance map must be non-empty");
    }
    for (double v : grid_.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "importance value outside [0,1]: " + std::to_string(v));
      }
    }
  }
  explicit ImportanceMap(ScalarGrid grid)
      : ImportanceMap(grid.width(), grid.height(),
                      std::vector<double>(grid.values().begin(),
                                          grid.values().end())) {}

  static ImportanceMap Uniform(int width, int height, double value) {
    return ImportanceMap(
        width, height,
        std::vector<double>(static_cast<std::size_t>(width) * height, value));
  }

  int width() const { return grid_.width(); }
  int height() const { return grid_.height(); }
  Size size() const { return grid_.size(); }
  double at(int x, int y) const { return grid_.at(x, y); }
  std::span<const double> values() const { return grid_.values(); }
  const ScalarGrid& grid() const { return grid_; }

  friend bool operator==(const ImportanceMap&, const ImportanceMap&) = default;

 private:
  ScalarGrid grid_;
};

// BT.601 luma, range [0,255].
inline double Luminance(Rgb p) {
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

inline ScalarGrid ToLuminance(const RasterImage& img) {
  ScalarGrid out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(x, y) = Luminance(img.pixel(x, y));
    }
  }
  return out;
}

inline RasterImage Transpose(const RasterImage& img) {
  std::vector<std::uint8_t> data(img.data().size());
  std::size_t o = 0;
  for (int x = 0; x < img.width(); ++x) {
    for (int y = 0; y < img.height(); ++y) {
      for (int c = 0; c < RasterImage::kChannels; ++c) data[o++] = img.at(x, y, c);
    }
  }
  return RasterImage(img.height(), img.width(), std::move(data));
}

template <typename T>
Grid<T> Transpose(const Grid<T>& g) {
  Grid<T> out(g.height(), g.width());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) out.at(y, x) = g.at(x, y);
  }
  return out;
}

inline ImportanceMap Transpose(const ImportanceMap& m) {
  return ImportanceMap(Transpose(m.grid()));
}

}  // namespace retarget
