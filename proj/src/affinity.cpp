#include "mvm/affinity.hpp"

#include <cmath>

namespace mvm {

void Pose2D::finalize() {
  if (joints.size() != static_cast<size_t>(kNumJoints) ||
      joint_confidence.size() != joints.size() || visible.size() != joints.size())
    throw Error("invalid-pose", "pose arrays must all have " +
                                    std::to_string(kNumJoints) + " entries");
  double sum = 0.0;
  int n = 0;
  for (int c = 0; c < kNumJoints; ++c) {
    if (!visible[c]) continue;
    if (joints[c].x() < 0.0 || joints[c].x() > 1.0 || joints[c].y() < 0.0 ||
        joints[c].y() > 1.0)
      throw Error("invalid-pose", "visible joint outside normalized [0,1]^2");
    sum += joint_confidence[c];
    ++n;
  }
  if (n == 0) throw Error("invalid-pose", "pose has no visible joint");
  confidence = sum / n;
}

AppearanceDescriptor AppearanceDescriptor::from_raw(const Eigen::VectorXd& raw) {
  double n = raw.norm();
  if (n <= 0.0) throw Error("invalid-descriptor", "descriptor has zero norm");
  return {raw / n};
}

double appearance_similarity(const AppearanceDescriptor& d_u,
                             const AppearanceDescriptor& d_v) {
  if (d_u.vector.size() != d_v.vector.size())
    throw Error("descriptor-mismatch", "descriptor dimensions differ");
  return std::max(0.0, d_u.vector.dot(d_v.vector));
}

double geometric_distance(const Pose2D& pose_u, const Pose2D& pose_v,
                          const Mat3& F_uv, const Mat3& F_vu,
                          const CameraView& cam_u, const CameraView& cam_v,
                          int min_common_joints) {
  if (pose_u.frame_id == pose_v.frame_id)
    throw Error("same-frame", "geometric distance needs poses from distinct frames");
  double sum = 0.0;
  int common = 0;
  for (int c = 0; c < kNumJoints; ++c) {
    if (!pose_u.visible[c] || !pose_v.visible[c]) continue;
    Vec2 pu = pose_u.joint_px(c, cam_u);
    Vec2 pv = pose_v.joint_px(c, cam_v);
    sum += epipolar_line(F_uv, pu).distance(pv);  // line of u's joint in view v
    sum += epipolar_line(F_vu, pv).distance(pu);
    ++common;
  }
  if (common < min_common_joints)
    throw Error("insufficient-overlap",
                "only " + std::to_string(common) + " jointly visible joints");
  return sum / (2.0 * common);
}

double pairwise_affinity(const Pose2D& pose_u, const Pose2D& pose_v,
                         const AppearanceDescriptor* desc_u,
                         const AppearanceDescriptor* desc_v,
                         const Mat3& F_uv, const Mat3& F_vu,
                         const CameraView& cam_u, const CameraView& cam_v,
                         const AffinityParams& params) {
  if (params.gamma <= 0.0) throw Error("invalid-gamma", "gamma must be positive");

  double similarity = 1.0;
  if (params.mode != AffinityMode::kGeometricOnly && desc_u && desc_v)
    similarity = appearance_similarity(*desc_u, *desc_v);

  double geometric = 1.0;
  if (params.mode != AffinityMode::kAppearanceOnly) {
    double d = geometric_distance(pose_u, pose_v, F_uv, F_vu, cam_u, cam_v,
                                  params.min_common_joints);
    geometric = 1.0 / (1.0 + std::exp(params.gamma * d));
  }
  return similarity * geometric;
}

AffinityMatrix build_affinity_matrix(
    const std::vector<Pose2D>& poses, const std::vector<CameraView>& cameras,
    const std::map<std::pair<int, int>, AppearanceDescriptor>* descriptors,
    const AffinityParams& params) {
  std::map<int, const CameraView*> cam_of;
  for (const auto& cam : cameras) cam_of[cam.frame_id] = &cam;

  AffinityMatrix m;
  for (const auto& pose : poses) {
    if (!cam_of.count(pose.frame_id))
      throw Error("missing-camera",
                  "no camera for frame " + std::to_string(pose.frame_id));
    std::pair<int, int> key{pose.frame_id, pose.pose_id};
    m.index_of[key] = static_cast<int>(m.key_of.size());
    m.key_of.push_back(key);
  }

  const int P = m.size();
  m.entries = Eigen::MatrixXd::Zero(P, P);
  m.same_frame.resize(P, P);
  m.same_frame.setConstant(false);

  auto descriptor_for = [&](const Pose2D& p) -> const AppearanceDescriptor* {
    if (!descriptors) return nullptr;
    auto it = descriptors->find({p.frame_id, p.pose_id});
    return it == descriptors->end() ? nullptr : &it->second;
  };

  // Fundamental matrices cached per ordered frame pair.
  std::map<std::pair<int, int>, Mat3> F_cache;
  auto fundamental = [&](const CameraView& a, const CameraView& b) -> const Mat3& {
    auto key = std::make_pair(a.frame_id, b.frame_id);
    auto it = F_cache.find(key);
    if (it == F_cache.end())
      it = F_cache.emplace(key, fundamental_matrix(a, b)).first;
    return it->second;
  };

  for (int i = 0; i < P; ++i) {
    for (int j = i + 1; j < P; ++j) {
      const Pose2D& pu = poses[i];
      const Pose2D& pv = poses[j];
      if (pu.frame_id == pv.frame_id) {
        m.same_frame(i, j) = m.same_frame(j, i) = true;
        continue;
      }
      const CameraView& cu = *cam_of[pu.frame_id];
      const CameraView& cv = *cam_of[pv.frame_id];
      double a = 0.0;
      try {
        a = pairwise_affinity(pu, pv, descriptor_for(pu), descriptor_for(pv),
                              fundamental(cu, cv), fundamental(cv, cu), cu, cv,
                              params);
      } catch (const Error& e) {
        if (e.code() != "insufficient-overlap") throw;
      }
      m.entries(i, j) = m.entries(j, i) = a;
    }
  }
  return m;
}

}  // namespace mvm
