#pragma once

#include <cstdint>
#include <map>

#include "mvm/affinity.hpp"
#include "mvm/skeleton.hpp"

namespace mvm {

struct NoiseModel {
  double pixel_sigma = 0.0;
  double outlier_rate = 0.0;
  double outlier_offset_px = 50.0;
  double miss_rate = 0.0;
  int descriptor_dim = 16;
  double descriptor_noise = 0.0;
};

struct SceneSpec {
  int num_people = 2;
  double pose_jitter = 0.05;              // per-joint, scene units
  Vec3 region_min{-2.0, -2.0, 0.0};      // placement bounding box
  Vec3 region_max{2.0, 2.0, 0.0};
  double arc_degrees = 40.0;
  double radius = 8.0;
  double height = 1.6;
  int num_frames = 30;
  int image_width = 1280;
  int image_height = 720;
  double focal_px = 1100.0;
  NoiseModel noise;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruthScene {
  std::vector<Skeleton3D> skeletons;  // frozen, all joints valid
  std::vector<CameraView> cameras;    // the arc trajectory
  std::vector<Eigen::VectorXd> true_descriptors;  // one unit vector per person
  Vec3 look_at = Vec3::Zero();
};

struct RenderedScene {
  std::vector<Pose2D> poses;
  std::map<std::pair<int, int>, AppearanceDescriptor> descriptors;
  std::map<std::pair<int, int>, int> labels;  // (frame_id, pose_id) -> person
};

// Frozen people on jittered copies of the template pose, cameras on an
// inward-looking circular arc; fully determined by spec.seed.
GroundTruthScene sample_scene(const SceneSpec& spec);

// Projects every person into every camera and applies the noise model.
RenderedScene render_observations(const GroundTruthScene& scene,
                                  const SceneSpec& spec);

}  // namespace mvm
