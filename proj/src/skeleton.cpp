#include "mvm/skeleton.hpp"

namespace mvm {

const char* joint_name(int joint) {
  static const std::array<const char*, kNumJoints> names = {
      "nose", "left_eye", "right_eye", "left_ear", "right_ear",
      "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
      "left_wrist", "right_wrist", "left_hip", "right_hip",
      "left_knee", "right_knee", "left_ankle", "right_ankle"};
  return names.at(static_cast<size_t>(joint));
}

const std::vector<std::pair<int, int>>& anatomical_edges() {
  static const std::vector<std::pair<int, int>> edges = {
      {kLeftShoulder, kLeftElbow},   {kLeftElbow, kLeftWrist},
      {kRightShoulder, kRightElbow}, {kRightElbow, kRightWrist},
      {kLeftHip, kLeftKnee},         {kLeftKnee, kLeftAnkle},
      {kRightHip, kRightKnee},       {kRightKnee, kRightAnkle},
      {kLeftShoulder, kRightShoulder},
      {kLeftHip, kRightHip},
      {kLeftShoulder, kLeftHip},
      {kRightShoulder, kRightHip},
  };
  return edges;
}

const std::vector<std::pair<int, int>>& skeleton_edges() {
  static const std::vector<std::pair<int, int>> edges = [] {
    std::vector<std::pair<int, int>> e = anatomical_edges();
    // Virtual links: face chain and ear-shoulder connections.
    e.push_back({kNose, kLeftEye});
    e.push_back({kNose, kRightEye});
    e.push_back({kLeftEye, kRightEye});
    e.push_back({kLeftEye, kLeftEar});
    e.push_back({kRightEye, kRightEar});
    e.push_back({kLeftEar, kLeftShoulder});
    e.push_back({kRightEar, kRightShoulder});
    return e;
  }();
  return edges;
}

void BoneTable::validate(int num_joints) const {
  if (edges.size() != mean_lengths.size())
    throw Error("invalid-bone-table", "edge and length counts differ");
  for (size_t i = 0; i < edges.size(); ++i) {
    auto [a, b] = edges[i];
    if (a < 0 || a >= num_joints || b < 0 || b >= num_joints || a == b)
      throw Error("invalid-bone-table", "edge references an invalid joint index");
    if (mean_lengths[i] <= 0.0)
      throw Error("invalid-bone-table", "mean bone length must be positive");
  }
}

BoneTable default_bone_table() {
  BoneTable table;
  table.edges = anatomical_edges();
  table.mean_lengths = {
      0.28, 0.25,  // left upper arm, forearm
      0.28, 0.25,  // right upper arm, forearm
      0.45, 0.42,  // left thigh, shin
      0.45, 0.42,  // right thigh, shin
      0.36,        // shoulder width
      0.26,        // hip width
      0.55, 0.55,  // torso sides
  };
  table.validate();
  return table;
}

const std::vector<Vec3>& template_pose() {
  static const std::vector<Vec3> pose = {
      {0.00, 0.05, 1.68},   // nose
      {0.04, 0.04, 1.71},   // left_eye
      {-0.04, 0.04, 1.71},  // right_eye
      {0.08, 0.00, 1.69},   // left_ear
      {-0.08, 0.00, 1.69},  // right_ear
      {0.18, 0.00, 1.50},   // left_shoulder
      {-0.18, 0.00, 1.50},  // right_shoulder
      {0.22, 0.02, 1.22},   // left_elbow
      {-0.22, 0.02, 1.22},  // right_elbow
      {0.24, 0.06, 0.97},   // left_wrist
      {-0.24, 0.06, 0.97},  // right_wrist
      {0.13, 0.00, 0.95},   // left_hip
      {-0.13, 0.00, 0.95},  // right_hip
      {0.14, 0.02, 0.50},   // left_knee
      {-0.14, 0.02, 0.50},  // right_knee
      {0.15, 0.02, 0.08},   // left_ankle
      {-0.15, 0.02, 0.08},  // right_ankle
  };
  return pose;
}

int Skeleton3D::num_valid() const {
  int n = 0;
  for (bool v : joint_valid) n += v ? 1 : 0;
  return n;
}

}  // namespace mvm
