#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <vector>

#include "mvm/geometry.hpp"
#include "mvm/skeleton.hpp"

namespace mvm {

/// One detected 2D person in one frame, joints in normalized [0,1]^2.
struct Pose2D {
  int frame_id = -1;
  int pose_id = -1;
  std::vector<Vec2> joints;              // size kNumJoints, normalized coords
  std::vector<double> joint_confidence;  // size kNumJoints, in [0,1]
  std::vector<bool> visible;             // size kNumJoints
  double confidence = 0.0;               // mean joint confidence over visible joints

  // Checks invariants and recomputes the pose-level confidence.
  void finalize();

  Vec2 joint_px(int c, const CameraView& cam) const {
    return {joints[c].x() * cam.width, joints[c].y() * cam.height};
  }
};

struct AppearanceDescriptor {
  Eigen::VectorXd vector;  // stored unit-normalized

  static AppearanceDescriptor from_raw(const Eigen::VectorXd& raw);
};

enum class AffinityMode {
  kCombined,        // S * sigmoid(geometric), Eq-style product
  kGeometricOnly,   // S := 1
  kAppearanceOnly,  // geometric term := 1
};

struct AffinityParams {
  double gamma = 0.2;           // px^-1
  int min_common_joints = 4;
  AffinityMode mode = AffinityMode::kCombined;
};

/// Symmetric P x P affinity over all detections; same-frame pairs are zero.
struct AffinityMatrix {
  Eigen::MatrixXd entries;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> same_frame;
  std::map<std::pair<int, int>, int> index_of;  // (frame_id, pose_id) -> row
  std::vector<std::pair<int, int>> key_of;      // row -> (frame_id, pose_id)

  int size() const { return static_cast<int>(key_of.size()); }
};

double appearance_similarity(const AppearanceDescriptor& d_u,
                             const AppearanceDescriptor& d_v);

// Mean symmetric point-to-epipolar-line distance in pixels over jointly
// visible joints. F_uv maps points of view u to lines in view v.
double geometric_distance(const Pose2D& pose_u, const Pose2D& pose_v,
                          const Mat3& F_uv, const Mat3& F_vu,
                          const CameraView& cam_u, const CameraView& cam_v,
                          int min_common_joints = 4);

double pairwise_affinity(const Pose2D& pose_u, const Pose2D& pose_v,
                         const AppearanceDescriptor* desc_u,
                         const AppearanceDescriptor* desc_v,
                         const Mat3& F_uv, const Mat3& F_vu,
                         const CameraView& cam_u, const CameraView& cam_v,
                         const AffinityParams& params);

AffinityMatrix build_affinity_matrix(
    const std::vector<Pose2D>& poses, const std::vector<CameraView>& cameras,
    const std::map<std::pair<int, int>, AppearanceDescriptor>* descriptors,
    const AffinityParams& params);

}  // namespace mvm
