#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "mvm/matching.hpp"
#include "mvm/skeleton.hpp"

namespace mvm {

// The prior is evaluated in a pose-shape frame: root-centered and divided
// by the mean length of the listed edges, so placement and scale drop out.
struct PoseNormalization {
  int root_joint_index = kLeftHip;
  std::vector<std::pair<int, int>> edges;  // defaults to anatomical_edges()

  PoseNormalization() : edges(anatomical_edges()) {}
};

struct NormalizedPose {
  Eigen::VectorXd y;  // 3C, root at origin, unit mean bone length
  Vec3 root;
  double scale = 1.0;
};

NormalizedPose normalize_pose(const Eigen::VectorXd& x,
                              const PoseNormalization& norm);

// Jacobian dY/dX of the normalization map, 3C x 3C.
Eigen::MatrixXd normalization_jacobian(const Eigen::VectorXd& x,
                                       const PoseNormalization& norm);

/// Gaussian mixture pose prior over normalized 3C skeleton vectors.
struct GmmPrior {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  PoseNormalization normalization;

  // Validates invariants and caches Cholesky factors; call after filling.
  void finalize();

  int num_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  // Per-component log w_l + log N(x | mu_l, Sigma_l).
  Eigen::VectorXd component_log_densities(const Eigen::VectorXd& x) const;

 private:
  friend double pose_prior_energy(const Eigen::VectorXd&, const GmmPrior&);
  friend Eigen::VectorXd pose_prior_gradient(const Eigen::VectorXd&,
                                             const GmmPrior&);
  std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_;
  std::vector<double> log_norm_;
};

// -log sum_l w_l N(x | mu_l, Sigma_l); x already normalized.
double pose_prior_energy(const Eigen::VectorXd& x, const GmmPrior& gmm);
Eigen::VectorXd pose_prior_gradient(const Eigen::VectorXd& x, const GmmPrior& gmm);

struct BundleAdjustParams {
  double lambda = 1.0;
  double robust_delta_px = 10.0;
  int max_iterations = 200;
  double relative_tolerance = 1e-8;
};

// Confidence-weighted Huber reprojection energy over all visible
// observations of valid joints.
double reprojection_energy(const Skeleton3D& skeleton, const PoseGroup& group,
                           const std::vector<Pose2D>& poses,
                           const std::vector<CameraView>& cameras,
                           double robust_delta_px);

// Total bundle energy E_R + lambda * E_P and its gradient with respect to
// the stacked coordinates of the valid joints, for a skeleton whose full
// 3C vector is x_full (invalid joints held fixed).
double bundle_energy(const Eigen::VectorXd& x_full,
                     const std::vector<bool>& joint_valid,
                     const PoseGroup& group, const std::vector<Pose2D>& poses,
                     const std::vector<CameraView>& cameras,
                     const GmmPrior* gmm, const BundleAdjustParams& params,
                     Eigen::VectorXd* gradient = nullptr);

// Damped quadratic descent on the bundle energy; steps accepted only when
// the energy decreases. Returns the refined skeleton.
Skeleton3D bundle_adjust(const Skeleton3D& initial, const PoseGroup& group,
                         const std::vector<Pose2D>& poses,
                         const std::vector<CameraView>& cameras,
                         const GmmPrior* gmm, const BundleAdjustParams& params);

// Fills invalid joints from the conditional mean of the most responsible
// mixture component given the valid joints. Returns the full 3C vector in
// world coordinates.
Eigen::VectorXd impute_invalid_joints(const Skeleton3D& skeleton,
                                      const GmmPrior& gmm);

GmmPrior fit_gmm(const std::vector<Eigen::VectorXd>& corpus, int num_components,
                 std::uint64_t seed,
                 const PoseNormalization& normalization = {},
                 std::vector<double>* log_likelihood_history = nullptr);

// Closed-form scale: s* = sum(lbar_i * l_i) / sum(l_i^2) over bones whose
// endpoints are both valid.
double calibrate_scale(const Skeleton3D& skeleton, const BoneTable& bones);

}  // namespace mvm
