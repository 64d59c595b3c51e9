#pragma once

#include <filesystem>
#include <optional>

#include "mvm/io.hpp"

namespace mvm {

struct PipelineConfig {
  double gamma = 0.2;                 // px^-1
  double tau = 0.05;
  double seed_min_confidence = 0.3;
  double lambda = 1.0;
  double robust_delta_px = 10.0;
  int min_common_joints = 4;
  double c_var_tau = 0.5;
  int ransac_iterations = 100;
  double ransac_inlier_threshold_px = 10.0;
  int ransac_min_inliers = 2;
  double ransac_min_parallax_deg = 1.0;
  std::uint64_t seed = 0;
  AffinityMode affinity_mode = AffinityMode::kCombined;

  std::filesystem::path poses;
  std::filesystem::path cameras;
  std::optional<std::filesystem::path> descriptors;
  std::optional<std::filesystem::path> gmm;
  std::optional<std::filesystem::path> bones;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path out;

  void validate() const;
  RansacParams ransac_params() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Fully resolved settings, one key = value per line; a rerun from this
// text reproduces the outputs byte for byte.
std::string resolved_config_text(const PipelineConfig& config);

struct PipelineResult {
  Partition partition;
  std::vector<Skeleton3D> skeletons;
  std::vector<double> scale_factors;  // s* per skeleton
  EvalReport report;
};

// load -> affinity -> greedy match -> per-group RANSAC triangulation ->
// bundle adjustment -> scale calibration -> metrics. Writes groups.json,
// skeletons.json, eval_report.json and config_resolved.txt under out.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace mvm
