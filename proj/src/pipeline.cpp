#include "mvm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "mvm/reconstruction.hpp"

namespace mvm {

namespace {

std::string mode_name(AffinityMode mode) {
  switch (mode) {
    case AffinityMode::kCombined: return "combined";
    case AffinityMode::kGeometricOnly: return "geometric";
    case AffinityMode::kAppearanceOnly: return "appearance";
  }
  return "combined";
}

AffinityMode mode_from_name(const std::string& name) {
  if (name == "combined") return AffinityMode::kCombined;
  if (name == "geometric") return AffinityMode::kGeometricOnly;
  if (name == "appearance") return AffinityMode::kAppearanceOnly;
  throw Error("parse-error", "unknown affinity mode " + name);
}

}  // namespace

void PipelineConfig::validate() const {
  if (gamma <= 0.0 || tau < 0.0 || lambda < 0.0 || robust_delta_px <= 0.0 ||
      ransac_iterations < 1 || ransac_inlier_threshold_px <= 0.0 ||
      ransac_min_inliers < 2 || ransac_min_parallax_deg < 0.0 ||
      min_common_joints < 1 || c_var_tau < 0.0)
    throw Error("invalid-config", "a threshold is out of range");
  auto require = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p))
      throw Error("parse-error",
                  std::string(what) + " file does not exist: " + p.string());
  };
  require(poses, "poses");
  require(cameras, "cameras");
  if (descriptors) require(*descriptors, "descriptors");
  if (gmm) require(*gmm, "gmm");
  if (bones) require(*bones, "bones");
  if (ground_truth) require(*ground_truth, "ground_truth");
  if (out.empty()) throw Error("invalid-config", "output directory not set");
}

RansacParams PipelineConfig::ransac_params() const {
  RansacParams p;
  p.iterations = ransac_iterations;
  p.inlier_threshold_px = ransac_inlier_threshold_px;
  p.min_inliers = ransac_min_inliers;
  p.min_parallax_rad = ransac_min_parallax_deg * M_PI / 180.0;
  p.seed = seed;
  return p;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  auto kv = load_key_value(path);
  PipelineConfig c;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&](const char* key, auto& field) {
    if (auto v = take(key)) {
      std::istringstream ss(*v);
      if (!(ss >> field))
        throw Error("parse-error", path.string() + ": bad value for " + key);
    }
  };
  num("gamma", c.gamma);
  num("tau", c.tau);
  num("seed_min_confidence", c.seed_min_confidence);
  num("lambda", c.lambda);
  num("robust_delta_px", c.robust_delta_px);
  num("min_common_joints", c.min_common_joints);
  num("c_var_tau", c.c_var_tau);
  num("ransac_iterations", c.ransac_iterations);
  num("ransac_inlier_threshold_px", c.ransac_inlier_threshold_px);
  num("ransac_min_inliers", c.ransac_min_inliers);
  num("ransac_min_parallax_deg", c.ransac_min_parallax_deg);
  num("seed", c.seed);
  if (auto v = take("affinity_mode")) c.affinity_mode = mode_from_name(*v);
  if (auto v = take("poses")) c.poses = *v;
  if (auto v = take("cameras")) c.cameras = *v;
  if (auto v = take("descriptors")) c.descriptors = *v;
  if (auto v = take("gmm")) c.gmm = *v;
  if (auto v = take("bones")) c.bones = *v;
  if (auto v = take("ground_truth")) c.ground_truth = *v;
  if (auto v = take("out")) c.out = *v;
  if (!kv.empty())
    throw Error("parse-error",
                path.string() + ": unknown key " + kv.begin()->first);
  return c;
}

std::string resolved_config_text(const PipelineConfig& c) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "gamma = " << c.gamma << "\n"
     << "tau = " << c.tau << "\n"
     << "seed_min_confidence = " << c.seed_min_confidence << "\n"
     << "lambda = " << c.lambda << "\n"
     << "robust_delta_px = " << c.robust_delta_px << "\n"
     << "min_common_joints = " << c.min_common_joints << "\n"
     << "c_var_tau = " << c.c_var_tau << "\n"
     << "ransac_iterations = " << c.ransac_iterations << "\n"
     << "ransac_inlier_threshold_px = " << c.ransac_inlier_threshold_px << "\n"
     << "ransac_min_inliers = " << c.ransac_min_inliers << "\n"
     << "ransac_min_parallax_deg = " << c.ransac_min_parallax_deg << "\n"
     << "seed = " << c.seed << "\n"
     << "affinity_mode = " << mode_name(c.affinity_mode) << "\n"
     << "poses = " << c.poses.string() << "\n"
     << "cameras = " << c.cameras.string() << "\n";
  if (c.descriptors) ss << "descriptors = " << c.descriptors->string() << "\n";
  if (c.gmm) ss << "gmm = " << c.gmm->string() << "\n";
  if (c.bones) ss << "bones = " << c.bones->string() << "\n";
  if (c.ground_truth) ss << "ground_truth = " << c.ground_truth->string() << "\n";
  ss << "out = " << c.out.string() << "\n";
  return ss.str();
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();

  // Load everything up front so a bad input cannot leave partial outputs.
  auto cameras = load_cameras(config.cameras);
  auto poses = load_poses(config.poses);
  if (poses.empty()) throw Error("empty-detections", "no 2D detections to match");
  std::optional<std::map<std::pair<int, int>, AppearanceDescriptor>> descriptors;
  if (config.descriptors) descriptors = load_descriptors(*config.descriptors);
  std::optional<GmmPrior> gmm;
  if (config.gmm) gmm = load_gmm(*config.gmm);
  BoneTable bones = config.bones ? load_bones(*config.bones) : default_bone_table();
  std::optional<std::vector<Skeleton3D>> gt_skeletons;
  std::optional<std::map<std::pair<int, int>, int>> gt_labels;
  if (config.ground_truth) {
    gt_skeletons = load_ground_truth_skeletons(*config.ground_truth);
    gt_labels = load_labels(*config.ground_truth);
  }

  AffinityParams affinity_params;
  affinity_params.gamma = config.gamma;
  affinity_params.min_common_joints = config.min_common_joints;
  affinity_params.mode = config.affinity_mode;
  auto A = build_affinity_matrix(poses, cameras,
                                 descriptors ? &*descriptors : nullptr,
                                 affinity_params);

  PipelineResult result;
  result.partition = greedy_match(poses, A, {config.tau, config.seed_min_confidence});
  result.partition.objective = objective_value(result.partition, A, poses);

  ReconstructionParams rec_params{config.ransac_params(), config.seed};
  BundleAdjustParams ba_params;
  ba_params.lambda = config.lambda;
  ba_params.robust_delta_px = config.robust_delta_px;

  std::map<std::pair<int, int>, const Pose2D*> pose_of;
  for (const auto& p : poses) pose_of[{p.frame_id, p.pose_id}] = &p;

  int outliers = 0;
  double er_sum = 0.0;
  int er_count = 0;
  double group_size_sum = 0.0;
  int group_count = 0;
  double cvar_sum = 0.0;
  int cvar_count = 0;
  std::vector<int> group_index_of_skeleton;
  for (size_t gi = 0; gi < result.partition.groups.size(); ++gi) {
    const auto& group = result.partition.groups[gi];
    if (group.members.size() < 2) continue;  // non-reconstructable, kept in groups.json
    Skeleton3D skeleton = reconstruct_group(group, poses, cameras, rec_params);
    group_size_sum += static_cast<double>(group.members.size());
    ++group_count;

    // Visible observations not retained as inliers of a valid joint.
    for (int c = 0; c < kNumJoints; ++c) {
      if (!skeleton.joint_valid[c]) continue;
      int available = 0;
      for (const auto& key : group.members)
        if (pose_of.at(key)->visible[c]) ++available;
      outliers += available - static_cast<int>(skeleton.joints[c]->inlier_views.size());
    }

    if (skeleton.num_valid() > 0) {
      skeleton = bundle_adjust(skeleton, group, poses, cameras,
                               gmm ? &*gmm : nullptr, ba_params);
      try {
        result.scale_factors.push_back(calibrate_scale(skeleton, bones));
      } catch (const Error&) {
        result.scale_factors.push_back(1.0);
      }
      try {
        er_sum += reprojection_error_px(skeleton, group, poses, cameras);
        ++er_count;
      } catch (const Error&) {
      }
      std::vector<Pose2D> detections;
      for (const auto& key : group.members) detections.push_back(*pose_of.at(key));
      try {
        cvar_sum += c_var(detections, cameras, config.c_var_tau);
        ++cvar_count;
      } catch (const Error&) {
      }
      group_index_of_skeleton.push_back(static_cast<int>(gi));
      result.skeletons.push_back(std::move(skeleton));
    }
  }

  result.report.mean_reprojection_px = er_count > 0 ? er_sum / er_count : 0.0;
  result.report.mean_group_size =
      group_count > 0 ? group_size_sum / group_count : 0.0;
  result.report.outlier_count = outliers;
  result.report.c_var = cvar_count > 0 ? cvar_sum / cvar_count : 0.0;

  if (gt_labels)
    result.report.clustering_f1 = clustering_f1(result.partition, *gt_labels);
  if (gt_skeletons && gt_labels) {
    // Match each reconstructed skeleton to its majority ground-truth person.
    double mpjpe_sum = 0.0;
    int mpjpe_count = 0;
    for (size_t si = 0; si < result.skeletons.size(); ++si) {
      const auto& group = result.partition.groups[group_index_of_skeleton[si]];
      std::map<int, int> votes;
      for (const auto& key : group.members) {
        auto it = gt_labels->find(key);
        if (it != gt_labels->end()) ++votes[it->second];
      }
      if (votes.empty()) continue;
      int person = std::max_element(votes.begin(), votes.end(),
                                    [](auto& a, auto& b) {
                                      return a.second < b.second;
                                    })->first;
      if (person < 0 || person >= static_cast<int>(gt_skeletons->size())) continue;
      if (result.skeletons[si].num_valid() < 7) continue;  // too few keypoints
      try {
        mpjpe_sum += pa_mpjpe(result.skeletons[si], (*gt_skeletons)[person]);
        ++mpjpe_count;
      } catch (const Error&) {
      }
    }
    if (mpjpe_count > 0) result.report.pa_mpjpe = mpjpe_sum / mpjpe_count;
  }

  std::filesystem::create_directories(config.out);
  save_groups(result.partition, config.out / "groups.json");
  save_skeletons(result.skeletons, config.out / "skeletons.json");
  save_eval_report(result.report, config.out / "eval_report.json");
  {
    std::ofstream log(config.out / "config_resolved.txt");
    log << resolved_config_text(config);
  }
  return result;
}

}  // namespace mvm
