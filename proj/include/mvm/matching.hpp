#pragma once

#include <vector>

#include "mvm/affinity.hpp"

namespace mvm {

/// Cross-frame detections attributed to one person; at most one per frame.
struct PoseGroup {
  int person_id = -1;
  std::vector<std::pair<int, int>> members;  // (frame_id, pose_id)
  std::vector<double> member_scores;         // accumulated weighted affinity
};

struct Partition {
  std::vector<PoseGroup> groups;
  std::vector<std::pair<int, int>> unassigned;
  double objective = 0.0;

  // Coverage and one-pose-per-frame invariants against the matrix index.
  void validate(const AffinityMatrix& A) const;
};

struct GreedyParams {
  double tau = 0.05;
  double seed_min_confidence = 0.3;
};

// Double-sum mutual consistency objective: every unordered within-group
// pair contributes w_u*w_v*A(u,v) twice.
double objective_value(const Partition& partition, const AffinityMatrix& A,
                       const std::vector<Pose2D>& poses);

Partition greedy_match(const std::vector<Pose2D>& poses, const AffinityMatrix& A,
                       const GreedyParams& params);

// Exact maximizer by enumerating all frame-consistent set partitions.
// Guarded to small instances.
Partition exhaustive_match(const std::vector<Pose2D>& poses, const AffinityMatrix& A);

// Sequential baseline: optimal assignment between consecutive frames with
// cost 1-A, chained into tracks.
Partition hungarian_chain_match(const std::vector<Pose2D>& poses,
                                const AffinityMatrix& A);

// Minimum-cost perfect matching on a square cost matrix; returns the
// column assigned to each row.
std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost);

}  // namespace mvm
