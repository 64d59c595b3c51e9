#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mvm/geometry.hpp"

namespace mvm {

// 17-joint COCO keypoint convention.
constexpr int kNumJoints = 17;

enum Joint : int {
  kNose = 0,
  kLeftEye = 1,
  kRightEye = 2,
  kLeftEar = 3,
  kRightEar = 4,
  kLeftShoulder = 5,
  kRightShoulder = 6,
  kLeftElbow = 7,
  kRightElbow = 8,
  kLeftWrist = 9,
  kRightWrist = 10,
  kLeftHip = 11,
  kRightHip = 12,
  kLeftKnee = 13,
  kRightKnee = 14,
  kLeftAnkle = 15,
  kRightAnkle = 16,
};

const char* joint_name(int joint);

// Full drawing topology: anatomical bones plus the virtual links
// (ear-shoulder, face connections) used for association and visibility.
const std::vector<std::pair<int, int>>& skeleton_edges();

// Anatomical bones only, the edges that carry a physical length.
const std::vector<std::pair<int, int>>& anatomical_edges();

/// Bone edges with their reference mean lengths (scene units).
struct BoneTable {
  std::vector<std::pair<int, int>> edges;
  std::vector<double> mean_lengths;

  void validate(int num_joints = kNumJoints) const;
};

// Default anthropometric table over anatomical_edges(), lengths in meters.
BoneTable default_bone_table();

// Neutral standing pose, meters, feet near z=0, facing +y.
const std::vector<Vec3>& template_pose();

/// Reconstructed person: per-joint 3D points with validity flags.
struct Skeleton3D {
  int person_id = -1;
  std::vector<std::optional<Point3D>> joints;   // size kNumJoints
  std::vector<bool> joint_valid;                // size kNumJoints
  std::vector<std::string> failure_reasons;     // empty string when valid
  double mean_reprojection_px = 0.0;
  int total_2d_joints_used = 0;

  Skeleton3D()
      : joints(kNumJoints), joint_valid(kNumJoints, false),
        failure_reasons(kNumJoints) {}

  int num_valid() const;
};

}  // namespace mvm
