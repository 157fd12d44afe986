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

// Command-line front end: retarget, enlarge, video, energy, segment, ars
// and batch subcommands.
//
// Exit status: 0 success, 1 usage error, 2 I/O or consistency error,
// 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "retarget/retarget.hpp"

namespace retarget::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

// Name of the environment variable holding the external provider command
// used by `--energy cmd`.
constexpr const char* kProviderEnv = "RETARGET_ENERGY_CMD";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDegenerateTarget:
    case ErrorCode::kZeroDimension:
      return kExitUsage;
    case ErrorCode::kFoldover:
    case ErrorCode::kNonConvergence:
    case ErrorCode::kDegenerateMesh:
      return kExitNumerical;
    default:
      return kExitIo;
  }
}

/// "50%" resolves against `source` with round-half-up; plain numbers are
/// pixels.
inline int ResolveDimension(const std::string& spec, int source) {
  if (spec.empty()) return source;
  try {
    std::size_t used = 0;
    if (spec.back() == '%') {
      const double pct = std::stod(spec.substr(0, spec.size() - 1), &used);
      if (used != spec.size() - 1) throw UsageError("bad percentage '" + spec + "'");
      if (!(pct > 0.0 && pct <= 400.0)) {
        throw UsageError("percentage must lie in (0%, 400%]: " + spec);
      }
      const int px = static_cast<int>(std::floor(source * pct / 100.0 + 0.5));
      if (px < 1) throw UsageError("target " + spec + " leaves an empty image");
      return px;
    }
    const long px = std::stol(spec, &used);
    if (used != spec.size() || px < 1) throw UsageError("bad pixel size '" + spec + "'");
    return static_cast<int>(px);
  } catch (const std::logic_error&) {
    throw UsageError("bad size '" + spec + "'");
  }
}

struct JobConfig {
  std::string width = "100%";
  std::string height = "100%";
  std::string op = "seam";
  std::string energy = "gradient";
  std::string refresh;  // empty: source default
  std::string mode = "modified";
  double alpha = 0.8;
  double temporal_lambda = 1.0;
  int cell_size = 20;
  double sigma = 0.8;
  double k = 300.0;
  int min_size = 50;
  bool emit_deformation = false;
  std::string field_path;

  Size Resolve(Size source) const {
    return {ResolveDimension(width, source.width), ResolveDimension(height, source.height)};
  }

  EnergyProvider Provider() const {
    std::optional<RefreshPolicy> policy;
    if (refresh == "recompute") {
      policy = RefreshPolicy::kRecomputeEachIteration;
    } else if (refresh == "carry") {
      policy = RefreshPolicy::kCarryWithImage;
    } else if (!refresh.empty()) {
      throw UsageError("--refresh must be recompute or carry");
    }
    if (energy == "gradient") {
      return EnergyProvider::Gradient(policy.value_or(RefreshPolicy::kRecomputeEachIteration));
    }
    if (energy.rfind("map:", 0) == 0) {
      if (policy == RefreshPolicy::kRecomputeEachIteration) {
        throw UsageError("static maps cannot be recomputed; use --refresh carry");
      }
      return EnergyProvider::StaticMap(std::filesystem::path(energy.substr(4)));
    }
    if (energy == "cmd" || energy.rfind("cmd:", 0) == 0) {
      std::string command = energy.size() > 4 ? energy.substr(4) : "";
      if (command.empty()) {
        const char* env = std::getenv(kProviderEnv);
        if (env == nullptr || *env == '\0') {
          throw UsageError(std::string("--energy cmd needs a program or $") + kProviderEnv);
        }
        command = env;
      }
      return EnergyProvider::Command(
          command, policy.value_or(RefreshPolicy::kRecomputeEachIteration));
    }
    throw UsageError("unknown energy source '" + energy + "'");
  }

  WarpJob Warp() const {
    WarpJob job;
    if (mode == "modified") {
      job.energy.mode = WarpMode::kModifiedImage;
    } else if (mode == "legacy") {
      job.energy.mode = WarpMode::kLegacyImage;
    } else {
      throw UsageError("--mode must be modified or legacy");
    }
    job.energy.alpha = alpha;
    job.energy.temporal_lambda = temporal_lambda;
    job.cell_size = cell_size;
    job.segmentation = {sigma, k, min_size};
    return job;
  }

  void Validate() const {
    if (op != "seam" && op != "warp") throw UsageError("--op must be seam or warp");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("--alpha must lie in [0,1]");
    if (cell_size < 2) throw UsageError("--cell must be at least 2");
    if (!(sigma > 0.0) || !(k > 0.0) || min_size < 1) {
      throw UsageError("segmentation parameters must be strictly positive");
    }
  }
};

inline void AddJobOptions(CLI::App* cmd, JobConfig& cfg) {
  cmd->add_option("--width", cfg.width, "Target width: pixels or percentage (e.g. 50%)");
  cmd->add_option("--height", cfg.height, "Target height: pixels or percentage");
  cmd->add_option("--op", cfg.op, "Operator: seam or warp");
  cmd->add_option("--energy", cfg.energy,
                  "Energy source: gradient, map:<file.pgm>, cmd:<program> or cmd");
  cmd->add_option("--refresh", cfg.refresh, "Energy refresh: recompute or carry");
  cmd->add_option("--mode", cfg.mode, "Warp energy: modified or legacy");
  cmd->add_option("--alpha", cfg.alpha, "Legacy similarity weight");
  cmd->add_option("--lambda", cfg.temporal_lambda, "Video temporal weight");
  cmd->add_option("--cell", cfg.cell_size, "Warp mesh cell size in pixels");
  cmd->add_option("--sigma", cfg.sigma, "Segmentation smoothing sigma");
  cmd->add_option("--k", cfg.k, "Segmentation threshold k");
  cmd->add_option("--min-size", cfg.min_size, "Minimum patch size in pixels");
  cmd->add_flag("--emit-deformation", cfg.emit_deformation,
                "Write the deformation field next to the output");
  cmd->add_option("--field", cfg.field_path, "Deformation field path (implies emission)");
}

inline std::filesystem::path FieldPathFor(const JobConfig& cfg,
                                          const std::filesystem::path& out) {
  if (!cfg.field_path.empty()) return cfg.field_path;
  std::filesystem::path p = out;
  p += ".field";
  return p;
}

inline void WriteField(const std::filesystem::path& path, const DeformationField& field) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  field.Write(f);
}

struct JobOutput {
  RasterImage image;
  DeformationField field;
};

inline JobOutput RunJob(const RasterImage& img, const JobConfig& cfg) {
  cfg.Validate();
  const Size target = cfg.Resolve(img.size());
  const EnergyProvider provider = cfg.Provider();
  if (cfg.op == "seam") {
    auto [out, field] = RetargetSeam(img, provider, target);
    return {std::move(out), std::move(field)};
  }
  WarpResult r = RetargetWarp(img, provider, target, cfg.Warp());
  return {std::move(r.image), std::move(r.field)};
}

inline void RunFile(const std::filesystem::path& in, const std::filesystem::path& out,
                    const JobConfig& cfg) {
  const RasterImage img = LoadImage(in);
  JobOutput r = RunJob(img, cfg);
  SaveImage(out, r.image);
  if (cfg.emit_deformation || !cfg.field_path.empty()) {
    WriteField(FieldPathFor(cfg, out), r.field);
  }
}

inline bool IsFrameFile(const std::filesystem::path& p) {
  const std::string ext = io_detail::Lower(p.extension().string());
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

inline std::vector<std::filesystem::path> ListFrames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kFileNotFound, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && IsFrameFile(entry.path())) frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int Run(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    for (std::string& s : storage) argv.push_back(s.data());

    CLI::App app{"Content-aware image and video retargeting"};
    app.require_subcommand(1);

    std::string in, out, in_dir, out_dir, map_path, csv_path, labels_path, patch_csv;
    std::string field_path, original_path;
    std::vector<std::string> inputs;
    int metric_cell = 16;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    JobConfig cfg;

    CLI::App* retarget = app.add_subcommand("retarget", "Resize one image");
    retarget->add_option("--in", in, "Input image")->required();
    retarget->add_option("--out", out, "Output image")->required();
    AddJobOptions(retarget, cfg);

    CLI::App* enlarge = app.add_subcommand("enlarge", "Enlarge one image (targets >= 100%)");
    enlarge->add_option("--in", in, "Input image")->required();
    enlarge->add_option("--out", out, "Output image")->required();
    AddJobOptions(enlarge, cfg);

    CLI::App* video = app.add_subcommand("video", "Warp a directory of frames");
    video->add_option("--in", in_dir, "Input frame directory")->required();
    video->add_option("--out", out_dir, "Output frame directory")->required();
    AddJobOptions(video, cfg);

    CLI::App* energy = app.add_subcommand("energy", "Write the energy map of an image");
    energy->add_option("--in", in, "Input image")->required();
    energy->add_option("--out", out, "Output PGM/PNG")->required();
    energy->add_option("--energy", cfg.energy, "Energy source");

    CLI::App* segment = app.add_subcommand("segment", "Segment an image into patches");
    segment->add_option("--in", in, "Input image")->required();
    segment->add_option("--sigma", cfg.sigma, "Smoothing sigma");
    segment->add_option("--k", cfg.k, "Threshold k");
    segment->add_option("--min-size", cfg.min_size, "Minimum patch size");
    segment->add_option("--labels", labels_path, "Write labels as 16-bit PGM");
    segment->add_option("--map", map_path, "Importance map for per-patch energies");
    segment->add_option("--patches", patch_csv, "Write id,pixels,omega CSV");

    CLI::App* ars = app.add_subcommand("ars", "Aspect ratio similarity of a deformation");
    ars->add_option("--original", original_path, "Original image")->required();
    ars->add_option("--field", field_path, "Deformation field file")->required();
    ars->add_option("--map", map_path, "Importance map (uniform if omitted)");
    ars->add_option("--cell", metric_cell, "Metric cell size");
    ars->add_option("--csv", csv_path, "Write per-cell CSV");

    CLI::App* batch = app.add_subcommand("batch", "Resize many images");
    batch->add_option("--in", inputs, "Input images")->required();
    batch->add_option("--out-dir", out_dir, "Output directory")->required();
    batch->add_option("--jobs", jobs, "Concurrent jobs");
    AddJobOptions(batch, cfg);

    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitUsage;
    }

    try {
      if (retarget->parsed()) return Single(in, out, cfg, false);
      if (enlarge->parsed()) return Single(in, out, cfg, true);
      if (video->parsed()) return Video(in_dir, out_dir, cfg);
      if (energy->parsed()) return Energy(in, out, cfg);
      if (segment->parsed()) return SegmentCmd(in, cfg, labels_path, map_path, patch_csv);
      if (ars->parsed()) return ArsCmd(original_path, field_path, map_path, metric_cell, csv_path);
      if (batch->parsed()) return Batch(inputs, out_dir, cfg, jobs);
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return ExitCodeFor(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitIo;
    }
    return kExitUsage;
  }

 private:
  int Single(const std::string& in, const std::string& out, JobConfig cfg, bool enlarge) {
    if (enlarge) {
      const RasterImage img = LoadImage(in);
      const Size target = cfg.Resolve(img.size());
      if (target.width < img.width() || target.height < img.height()) {
        throw UsageError("enlarge targets must be at least the source size");
      }
    }
    RunFile(in, out, cfg);
    return kExitOk;
  }

  int Video(const std::string& in_dir, const std::string& out_dir, JobConfig cfg) {
    cfg.Validate();
    if (cfg.op != "warp") throw UsageError("video retargeting uses --op warp");
    const auto paths = ListFrames(in_dir);
    if (paths.empty()) throw UsageError("no frames in " + in_dir);
    std::vector<RasterImage> frames;
    frames.reserve(paths.size());
    for (const auto& p : paths) frames.push_back(LoadImage(p));
    const Size target = cfg.Resolve(frames.front().size());
    const std::vector<WarpResult> results =
        RetargetVideo(frames, cfg.Provider(), target, cfg.Warp());
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const std::filesystem::path out = std::filesystem::path(out_dir) / paths[i].filename();
      SaveImage(out, results[i].image);
      if (cfg.emit_deformation) WriteField(FieldPathFor(JobConfig{}, out), results[i].field);
    }
    out_ << results.size() << " frames written to " << out_dir << "\n";
    return kExitOk;
  }

  int Energy(const std::string& in, const std::string& out, const JobConfig& cfg) {
    const RasterImage img = LoadImage(in);
    SaveImportance(out, cfg.Provider().Compute(img));
    return kExitOk;
  }

  int SegmentCmd(const std::string& in, const JobConfig& cfg, const std::string& labels_path,
                 const std::string& map_path, const std::string& patch_csv) {
    const SegmentationParams params{cfg.sigma, cfg.k, cfg.min_size};
    try {
      params.Validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const RasterImage img = LoadImage(in);
    const LabelGrid labels = Segment(img, params);
    out_ << "patches: " << CountPatches(labels) << "\n";
    if (!labels_path.empty()) SaveGray16(labels_path, labels);
    if (!patch_csv.empty()) {
      const ImportanceMap map = map_path.empty()
                                    ? ImportanceMap::Uniform(img.width(), img.height(), 0.0)
                                    : LoadImportance(map_path, img.size());
      const PatchMap pm = PatchEnergy(labels, map);
      std::ofstream f(patch_csv);
      if (!f) throw Error(ErrorCode::kIoError, "cannot write " + patch_csv);
      f << "id,pixels,omega\n";
      for (const Patch& p : pm.patches) f << p.id << ',' << p.pixel_count << ',' << p.omega << '\n';
    }
    return kExitOk;
  }

  int ArsCmd(const std::string& original, const std::string& field_path,
             const std::string& map_path, int cell, const std::string& csv_path) {
    if (cell < 1) throw UsageError("--cell must be positive");
    const RasterImage img = LoadImage(original);
    std::ifstream f(field_path);
    if (!f) throw Error(ErrorCode::kFileNotFound, field_path);
    const DeformationField field = DeformationField::Read(f);
    if (field.source_size() != img.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "field source " + ToString(field.source_size()) + " vs original " +
                      ToString(img.size()));
    }
    const ImportanceMap map = map_path.empty()
                                  ? ImportanceMap::Uniform(img.width(), img.height(), 1.0)
                                  : LoadImportance(map_path, img.size());
    const ArsReport report = Ars(field, map, cell);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f\n", report.score);
    out_ << buf;
    if (!csv_path.empty()) {
      std::ofstream csv(csv_path);
      if (!csv) throw Error(ErrorCode::kIoError, "cannot write " + csv_path);
      report.WriteCsv(csv);
    }
    return kExitOk;
  }

  int Batch(const std::vector<std::string>& inputs, const std::string& out_dir,
            const JobConfig& cfg, int jobs) {
    cfg.Validate();
    if (jobs < 1) throw UsageError("--jobs must be positive");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> failures(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < inputs.size(); i = next++) {
        try {
          const std::filesystem::path in = inputs[i];
          RunFile(in, std::filesystem::path(out_dir) / in.filename(), cfg);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(inputs.size()));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    int failed = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (failures[i].empty()) continue;
      ++failed;
      err_ << "failed: " << inputs[i] << ": " << failures[i] << "\n";
    }
    out_ << (inputs.size() - failed) << "/" << inputs.size() << " images written\n";
    return failed == 0 ? kExitOk : kExitIo;
  }

  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace retarget::cli
