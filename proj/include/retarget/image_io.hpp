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

// Raster file I/O: binary PNM (P5/P6) and PNG via libpng.

#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "retarget/error.hpp"
#include "retarget/raster.hpp"

namespace retarget {

namespace io_detail {

inline std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void WriteFileBytes(const std::filesystem::path& path,
                           const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

inline bool HasPngSignature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

// Decoded raster with 1 or 3 channels, 8 bits per sample.
struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> samples;
};

class PnmReader {
 public:
  explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  Decoded Read() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') Fail("not a PNM file");
    int channels = 0;
    if (bytes_[1] == '5') {
      channels = 1;
    } else if (bytes_[1] == '6') {
      channels = 3;
    } else {
      Fail("unsupported PNM variant (only P5/P6)");
    }
    pos_ = 2;
    const long width = ReadInt();
    const long height = ReadInt();
    const long maxval = ReadInt();
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) Fail("bad header");
    ++pos_;
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::kZeroDimension, "PNM has zero dimension");
    }
    if (maxval <= 0 || maxval > 65535) Fail("bad maxval");
    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes_.size() - pos_ < count * bytes_per_sample) Fail("truncated data");

    Decoded out{static_cast<int>(width), static_cast<int>(height), channels,
                std::vector<std::uint8_t>(count)};
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = bytes_[pos_ + i * bytes_per_sample];
      if (bytes_per_sample == 2) {
        v = (v << 8) | bytes_[pos_ + i * 2 + 1];
        // 16-bit samples keep their high byte.
        v = maxval == 65535 ? (v >> 8) : static_cast<unsigned>(v * 255 / maxval);
      } else if (maxval != 255) {
        v = static_cast<unsigned>(std::lround(v * 255.0 / maxval));
      }
      out.samples[i] = static_cast<std::uint8_t>(std::min(v, 255u));
    }
    return out;
  }

 private:
  [[noreturn]] void Fail(const std::string& why) {
    throw Error(ErrorCode::kDecodeError, why);
  }

  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long ReadInt() {
    SkipSpaceAndComments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) Fail("bad header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000) Fail("header value too large");
      ++pos_;
    }
    return v;
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

struct PngMemorySource {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

inline void PngReadFromMemory(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngMemorySource*>(png_get_io_ptr(png));
  if (src->bytes->size() - src->pos < len) {
    png_error(png, "truncated PNG");
  }
  std::memcpy(out, src->bytes->data() + src->pos, len);
  src->pos += len;
}

inline void PngSilentWarning(png_structp, png_const_charp) {}

// Decodes to 8-bit gray or RGB; alpha is dropped, palettes expanded and
// 16-bit samples stripped to their high byte.
inline Decoded DecodePng(const std::vector<std::uint8_t>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, PngSilentWarning);
  if (png == nullptr) throw Error(ErrorCode::kDecodeError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kDecodeError, "libpng init failed");
  }
  PngMemorySource source{&bytes, 0};
  Decoded out;
  std::vector<png_bytep> rows;
  // Only trivially destructible state may be created between setjmp and the
  // end of decoding.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kDecodeError, "corrupt PNG");
  }
  png_set_read_fn(png, &source, PngReadFromMemory);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  // Alpha and tRNS transparency are ignored.
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = png_get_channels(png, info);
  out.samples.resize(static_cast<std::size_t>(width) * height * out.channels);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = out.samples.data() + static_cast<std::size_t>(y) * width * out.channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (out.channels != 1 && out.channels != 3) {
    throw Error(ErrorCode::kDecodeError, "unexpected PNG channel layout");
  }
  return out;
}

inline Decoded Decode(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  Decoded d = HasPngSignature(bytes) ? DecodePng(bytes) : PnmReader(bytes).Read();
  if (d.width < 1 || d.height < 1) {
    throw Error(ErrorCode::kZeroDimension, path.string());
  }
  return d;
}

inline std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline void WritePng(const std::filesystem::path& path, int width, int height,
                     bool gray, const std::uint8_t* samples) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, samples, 0,
                               nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, "PNG write failed: " + msg);
  }
}

inline std::vector<std::uint8_t> PnmHeader(char kind, int width, int height,
                                           int maxval) {
  const std::string h = std::string("P") + kind + "\n" + std::to_string(width) +
                        " " + std::to_string(height) + "\n" +
                        std::to_string(maxval) + "\n";
  return std::vector<std::uint8_t>(h.begin(), h.end());
}

inline bool IsPngPath(const std::filesystem::path& path) {
  return Lower(path.extension().string()) == ".png";
}

}  // namespace io_detail

/// Loads a PNG or binary PPM/PGM as RGB. Gray sources are replicated into
/// all three channels.
inline RasterImage LoadImage(const std::filesystem::path& path) {
  io_detail::Decoded d = io_detail::Decode(path);
  if (d.channels == 3) return RasterImage(d.width, d.height, std::move(d.samples));
  std::vector<std::uint8_t> rgb(d.samples.size() * 3);
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = d.samples[i];
  }
  return RasterImage(d.width, d.height, std::move(rgb));
}

/// Loads an 8-bit grayscale importance raster; sample u becomes u/255.
inline ImportanceMap LoadImportance(const std::filesystem::path& path,
                                    Size expected) {
  io_detail::Decoded d = io_detail::Decode(path);
  if (d.channels != 1) {
    throw Error(ErrorCode::kDecodeError,
                "importance map must be single-channel: " + path.string());
  }
  if (Size{d.width, d.height} != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                "importance map " + path.string() + " is " +
                    ToString({d.width, d.height}) + ", expected " +
                    ToString(expected));
  }
  std::vector<double> values(d.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = d.samples[i] / 255.0;
  return ImportanceMap(d.width, d.height, std::move(values));
}

inline ImportanceMap LoadImportance(const std::filesystem::path& path) {
  io_detail::Decoded d = io_detail::Decode(path);
  if (d.channels != 1) {
    throw Error(ErrorCode::kDecodeError,
                "importance map must be single-channel: " + path.string());
  }
  return LoadImportance(path, {d.width, d.height});
}

/// Writes P6 unless the extension is .png.
inline void SaveImage(const std::filesystem::path& path, const RasterImage& img) {
  if (io_detail::IsPngPath(path)) {
    io_detail::WritePng(path, img.width(), img.height(), false, img.data().data());
    return;
  }
  std::vector<std::uint8_t> bytes = io_detail::PnmHeader('6', img.width(), img.height(), 255);
  bytes.insert(bytes.end(), img.data().begin(), img.data().end());
  io_detail::WriteFileBytes(path, bytes);
}

inline std::vector<std::uint8_t> QuantizeImportance(const ImportanceMap& map) {
  std::vector<std::uint8_t> q(map.values().size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = static_cast<std::uint8_t>(std::lround(map.values()[i] * 255.0));
  }
  return q;
}

/// Writes P5 unless the extension is .png. Values are rounded to u/255.
inline void SaveImportance(const std::filesystem::path& path, const ImportanceMap& map) {
  const std::vector<std::uint8_t> q = QuantizeImportance(map);
  if (io_detail::IsPngPath(path)) {
    io_detail::WritePng(path, map.width(), map.height(), true, q.data());
    return;
  }
  std::vector<std::uint8_t> bytes = io_detail::PnmHeader('5', map.width(), map.height(), 255);
  bytes.insert(bytes.end(), q.begin(), q.end());
  io_detail::WriteFileBytes(path, bytes);
}

/// 16-bit big-endian P5, values clamped to 65535. Used for label dumps.
inline void SaveGray16(const std::filesystem::path& path, const Grid<int>& labels) {
  std::vector<std::uint8_t> bytes =
      io_detail::PnmHeader('5', labels.width(), labels.height(), 65535);
  for (int v : labels.values()) {
    const int c = std::clamp(v, 0, 65535);
    bytes.push_back(static_cast<std::uint8_t>(c >> 8));
    bytes.push_back(static_cast<std::uint8_t>(c & 0xff));
  }
  io_detail::WriteFileBytes(path, bytes);
}

}  // namespace retarget
