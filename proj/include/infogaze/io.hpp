#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "infogaze/baselines.hpp"
#include "infogaze/calibration.hpp"
#include "infogaze/metrics.hpp"
#include "infogaze/temporal.hpp"
#include "infogaze/types.hpp"

namespace infogaze {

// Binary map format: magic "SMAP", u32 version = 1, u32 width, u32 height,
// height*width float64 row-major. Little-endian; bit-exact round trip.
void write_map(const std::filesystem::path& path, const Grid& grid);
Grid read_map(const std::filesystem::path& path);

// Fixation CSV with header exactly `image_id,subject_id,x,y,t`; rows are
// grouped into trains by (image_id, subject_id) preserving file order.
std::vector<FixationTrain> parse_fixations_csv(const std::filesystem::path& path);
void write_fixations_csv(const std::filesystem::path& path,
                         const std::vector<FixationTrain>& trains);

// Frame CSV with header exactly `image_id,width,height`.
std::vector<ImageFrame> parse_frames_csv(const std::filesystem::path& path);
void write_frames_csv(const std::filesystem::path& path,
                      const std::vector<ImageFrame>& frames);

struct ModelSpec {
  std::string model_id;
  std::filesystem::path map_dir;  // <map_dir>/<image_id>.smap
};

struct RunConfig {
  std::filesystem::path frames_csv;
  std::filesystem::path fixations_csv;
  std::vector<ModelSpec> models;
  Stage stage = Stage::nonlin_cb_blur;

  int max_iter = 500;
  double tolerance = 1e-7;
  std::uint64_t seed = 0;

  std::vector<int> baseline_bin_grid = {4, 8, 16, 32};
  std::vector<double> baseline_lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> gold_sigma_grid;  // empty = GoldGrids default
  int gold_folds = 10;

  int kl_bins = 10;
  double kl_epsilon = 1e-9;
  bool auc_exhaustive = true;
  int auc_sample_size = 10000;

  std::filesystem::path output_dir = "out";
  int jobs = 1;

  std::string config_hash;  // FNV-1a of the config file bytes
};

RunConfig load_config(const std::filesystem::path& path);

// Loads frames + fixations and, for the named models, one map per frame
// from <map_dir>/<image_id>.smap. Validates the assembled dataset.
Dataset load_dataset(const RunConfig& cfg, const std::vector<std::string>& model_ids);

// Serialization of fitted parameters.
std::string calibration_params_to_json(const CalibrationParams& p);
CalibrationParams calibration_params_from_json(const std::string& text);
std::string temporal_params_to_json(const TemporalParams& p);
TemporalParams temporal_params_from_json(const std::string& text);

// CSV tables carry a <name>.meta.json sidecar with config hash, seed and
// tool version so runs are reproducible and attributable.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_meta_sidecar(const std::filesystem::path& table_path, const RunConfig& cfg,
                        const std::string& generator);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace infogaze
