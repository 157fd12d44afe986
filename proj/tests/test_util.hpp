#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "retarget/raster.hpp"

namespace retarget::testing {

inline RasterImage RandomImage(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : data) v = static_cast<std::uint8_t>(d(rng));
  return RasterImage(w, h, std::move(data));
}

inline ImportanceMap RandomMap(std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) x = d(rng);
  return ImportanceMap(w, h, std::move(v));
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("retarget-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace retarget::testing
