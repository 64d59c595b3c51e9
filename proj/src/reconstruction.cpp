#include "mvm/reconstruction.hpp"

#include <map>

namespace mvm {

std::uint64_t joint_seed(std::uint64_t seed, int person_id, int joint_index) {
  // splitmix64 over the packed inputs
  std::uint64_t x = seed ^ (static_cast<std::uint64_t>(person_id) << 32) ^
                    static_cast<std::uint64_t>(joint_index);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Skeleton3D reconstruct_group(const PoseGroup& group,
                             const std::vector<Pose2D>& poses,
                             const std::vector<CameraView>& cameras,
                             const ReconstructionParams& params) {
  if (group.members.size() < 2)
    throw Error("non-reconstructable",
                "group needs at least 2 members, has " +
                    std::to_string(group.members.size()));

  std::map<int, const CameraView*> cam_of;
  for (const auto& cam : cameras) cam_of[cam.frame_id] = &cam;
  std::map<std::pair<int, int>, const Pose2D*> pose_of;
  for (const auto& p : poses) pose_of[{p.frame_id, p.pose_id}] = &p;

  Skeleton3D skeleton;
  skeleton.person_id = group.person_id;

  double residual_sum = 0.0;
  int valid_joints = 0;
  for (int c = 0; c < kNumJoints; ++c) {
    std::vector<Observation> obs;
    for (const auto& key : group.members) {
      auto pit = pose_of.find(key);
      if (pit == pose_of.end())
        throw Error("index-error", "group member has no matching pose");
      const Pose2D& pose = *pit->second;
      if (!pose.visible[c]) continue;
      auto cit = cam_of.find(pose.frame_id);
      if (cit == cam_of.end())
        throw Error("missing-camera",
                    "no camera for frame " + std::to_string(pose.frame_id));
      obs.push_back({cit->second, pose.joint_px(c, *cit->second),
                     pose.joint_confidence[c]});
    }
    if (obs.size() < 2) {
      skeleton.failure_reasons[c] = "insufficient-views";
      continue;
    }
    RansacParams rp = params.ransac;
    rp.seed = joint_seed(params.seed, group.person_id, c);
    try {
      Point3D point = ransac_triangulate(obs, rp);
      skeleton.total_2d_joints_used += static_cast<int>(point.inlier_views.size());
      residual_sum += point.residual;
      ++valid_joints;
      skeleton.joints[c] = std::move(point);
      skeleton.joint_valid[c] = true;
    } catch (const Error& e) {
      skeleton.failure_reasons[c] = e.code();
    }
  }
  if (valid_joints > 0) skeleton.mean_reprojection_px = residual_sum / valid_joints;
  return skeleton;
}

}  // namespace mvm
