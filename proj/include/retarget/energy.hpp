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

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "retarget/error.hpp"
#include "retarget/image_io.hpp"
#include "retarget/raster.hpp"

namespace retarget {

/// Gradient magnitude |dI/dx| + |dI/dy| of the luminance, forward
/// differences with the last row/column replicated, scaled by 1/510 so the
/// result lies in [0,1].
inline ScalarGrid RawGradientEnergy(const ScalarGrid& lum) {
  const int w = lum.width();
  const int h = lum.height();
  ScalarGrid e(w, h);
  for (int y = 0; y < h; ++y) {
    const int yn = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xn = std::min(x + 1, w - 1);
      const double c = lum.at(x, y);
      e.at(x, y) = std::abs(lum.at(xn, y) - c) + std::abs(lum.at(x, yn) - c);
    }
  }
  return e;
}

inline ImportanceMap GradientEnergy(const RasterImage& img) {
  ScalarGrid e = RawGradientEnergy(ToLuminance(img));
  for (double& v : e.values()) v = std::min(v / 510.0, 1.0);
  return ImportanceMap(std::move(e));
}

enum class EnergySource { kGradient, kStaticMap, kCommand };

enum class RefreshPolicy { kRecomputeEachIteration, kCarryWithImage };

// Where per-iteration energy comes from and whether it is regenerated after
// every modification of the image or carried along with it.
class EnergyProvider {
 public:
  static EnergyProvider Gradient(
      RefreshPolicy refresh = RefreshPolicy::kRecomputeEachIteration) {
    EnergyProvider p;
    p.source_ = EnergySource::kGradient;
    p.refresh_ = refresh;
    return p;
  }

  // A file cannot be regenerated at reduced sizes, so static maps are
  // always carried.
  static EnergyProvider StaticMap(std::filesystem::path path) {
    EnergyProvider p;
    p.source_ = EnergySource::kStaticMap;
    p.refresh_ = RefreshPolicy::kCarryWithImage;
    p.map_path_ = std::move(path);
    return p;
  }

  static EnergyProvider StaticMap(ImportanceMap map) {
    EnergyProvider p;
    p.source_ = EnergySource::kStaticMap;
    p.refresh_ = RefreshPolicy::kCarryWithImage;
    p.map_ = std::move(map);
    return p;
  }

  /// `command` is run as `<command> <input.ppm> <output.pgm>`.
  static EnergyProvider Command(
      std::string command,
      RefreshPolicy refresh = RefreshPolicy::kRecomputeEachIteration) {
    if (command.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty provider command");
    }
    EnergyProvider p;
    p.source_ = EnergySource::kCommand;
    p.refresh_ = refresh;
    p.command_ = std::move(command);
    return p;
  }

  EnergySource source() const { return source_; }
  RefreshPolicy refresh() const { return refresh_; }
  bool carries() const { return refresh_ == RefreshPolicy::kCarryWithImage; }
  const std::string& command() const { return command_; }

  /// Fresh energy for `img` regardless of refresh policy.
  ImportanceMap Compute(const RasterImage& img) const {
    switch (source_) {
      case EnergySource::kGradient:
        return GradientEnergy(img);
      case EnergySource::kStaticMap:
        if (map_) {
          if (map_->size() != img.size()) {
            throw Error(ErrorCode::kDimensionMismatch,
                        "importance map is " + ToString(map_->size()) +
                            ", image is " + ToString(img.size()));
          }
          return *map_;
        }
        return LoadImportance(map_path_, img.size());
      case EnergySource::kCommand:
        return RunCommand(img);
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown energy source");
  }

 private:
  ImportanceMap RunCommand(const RasterImage& img) const {
    static std::atomic<unsigned long> counter{0};
    const std::size_t tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() /
        ("retarget-energy-" + std::to_string(::getpid()) + "-" +
         std::to_string(tid % 1000000) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    const std::filesystem::path in = dir / "input.ppm";
    const std::filesystem::path out = dir / "output.pgm";
    auto cleanup = [&dir] {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    };
    try {
      SaveImage(in, img);
      const std::string cmd = command_ + " " + Quote(in.string()) + " " +
                              Quote(out.string()) + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        throw Error(ErrorCode::kProviderFailure,
                    "command exited with status " + std::to_string(status) +
                        ": " + command_);
      }
      ImportanceMap map = LoadImportance(out, img.size());
      cleanup();
      return map;
    } catch (const Error& e) {
      cleanup();
      if (e.code() == ErrorCode::kProviderFailure) throw;
      throw Error(ErrorCode::kProviderFailure, e.what());
    }
  }

  static std::string Quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
      if (c == '\'') {
        q += "'\\''";
      } else {
        q += c;
      }
    }
    return q + "'";
  }

  EnergySource source_ = EnergySource::kGradient;
  RefreshPolicy refresh_ = RefreshPolicy::kRecomputeEachIteration;
  std::filesystem::path map_path_;
  std::optional<ImportanceMap> map_;
  std::string command_;
};

/// Energy to use for the current iteration. In carry mode the carried map
/// is returned as is (and is required to match `current`); when nothing has
/// been carried yet the provider computes the initial map.
inline ImportanceMap EnergyForIteration(const EnergyProvider& provider,
                                        const RasterImage& current,
                                        const ImportanceMap* carried) {
  if (provider.carries() && carried != nullptr) {
    if (carried->size() != current.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "carried map " + ToString(carried->size()) +
                      " does not match image " + ToString(current.size()));
    }
    return *carried;
  }
  return provider.Compute(current);
}

}  // namespace retarget
