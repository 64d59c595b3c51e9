#pragma once

#include <cstdint>

#include "mvm/matching.hpp"
#include "mvm/skeleton.hpp"

namespace mvm {

struct ReconstructionParams {
  RansacParams ransac;
  std::uint64_t seed = 0;
};

// Deterministic per-joint RANSAC seed under any execution schedule.
std::uint64_t joint_seed(std::uint64_t seed, int person_id, int joint_index);

// Independent per-joint robust triangulation of one matched group.
// Joints that cannot be triangulated are marked invalid with an
// enumerated reason (insufficient-views | low-parallax | no-consensus).
Skeleton3D reconstruct_group(const PoseGroup& group,
                             const std::vector<Pose2D>& poses,
                             const std::vector<CameraView>& cameras,
                             const ReconstructionParams& params);

}  // namespace mvm
