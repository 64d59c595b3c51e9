#include "mvm/refinement.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace mvm {

namespace {

constexpr double kCovarianceFloor = 1e-6;

double huber(double t, double delta) {
  return t <= delta ? 0.5 * t * t : delta * (t - 0.5 * delta);
}

// d huber(t)/dt divided by t, the IRLS weight; continuous at t=0.
double huber_weight(double t, double delta) {
  return t <= delta ? 1.0 : delta / t;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct RootScale {
  Vec3 root;
  double scale;
};

// Root and scale from the subset of joints marked usable.
RootScale partial_root_scale(const Eigen::VectorXd& x,
                             const std::vector<bool>& usable,
                             const PoseNormalization& norm) {
  auto joint = [&](int j) -> Vec3 { return x.segment<3>(3 * j); };
  RootScale rs{Vec3::Zero(), 1.0};
  if (usable[norm.root_joint_index]) {
    rs.root = joint(norm.root_joint_index);
  } else {
    int n = 0;
    for (size_t j = 0; j < usable.size(); ++j)
      if (usable[j]) { rs.root += joint(static_cast<int>(j)); ++n; }
    if (n == 0) throw Error("invalid-normalization", "no usable joints");
    rs.root /= n;
  }
  double sum = 0.0;
  int n_edges = 0;
  for (auto [a, b] : norm.edges) {
    if (!usable[a] || !usable[b]) continue;
    sum += (joint(a) - joint(b)).norm();
    ++n_edges;
  }
  if (n_edges > 0 && sum > 1e-12) rs.scale = sum / n_edges;
  return rs;
}

}  // namespace

NormalizedPose normalize_pose(const Eigen::VectorXd& x,
                              const PoseNormalization& norm) {
  const int C = static_cast<int>(x.size()) / 3;
  if (x.size() % 3 != 0 || norm.root_joint_index < 0 || norm.root_joint_index >= C)
    throw Error("invalid-normalization", "bad skeleton vector or root index");
  std::vector<bool> usable(C, true);
  RootScale rs = partial_root_scale(x, usable, norm);
  NormalizedPose out;
  out.root = rs.root;
  out.scale = rs.scale;
  out.y.resize(x.size());
  for (int j = 0; j < C; ++j)
    out.y.segment<3>(3 * j) = (x.segment<3>(3 * j) - rs.root) / rs.scale;
  return out;
}

Eigen::MatrixXd normalization_jacobian(const Eigen::VectorXd& x,
                                       const PoseNormalization& norm) {
  const int C = static_cast<int>(x.size()) / 3;
  const int D = static_cast<int>(x.size());
  NormalizedPose np = normalize_pose(x, norm);
  const double s = np.scale;

  // g = ds/dx, accumulated over edges.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(D);
  int n_edges = static_cast<int>(norm.edges.size());
  for (auto [a, b] : norm.edges) {
    Vec3 d = x.segment<3>(3 * a) - x.segment<3>(3 * b);
    double len = d.norm();
    if (len < 1e-12) continue;
    Vec3 u = d / (len * n_edges);
    g.segment<3>(3 * a) += u;
    g.segment<3>(3 * b) -= u;
  }

  // dY_j/dx_m = (delta_jm - delta_m,root) I / s - Y_j g_m^T / s
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(D, D);
  const int R = norm.root_joint_index;
  for (int j = 0; j < C; ++j) {
    J.block<3, 3>(3 * j, 3 * j) += Mat3::Identity() / s;
    J.block<3, 3>(3 * j, 3 * R) -= Mat3::Identity() / s;
    Vec3 yj = np.y.segment<3>(3 * j);
    J.middleRows<3>(3 * j) -= (yj / s) * g.transpose();
  }
  return J;
}

void GmmPrior::finalize() {
  const int L = num_components();
  if (L == 0) throw Error("prior-config", "mixture has no components");
  if (means.size() != weights.size() || covariances.size() != weights.size())
    throw Error("prior-config", "component arrays have inconsistent sizes");
  double wsum = 0.0;
  for (double w : weights) {
    if (w <= 0.0 || w > 1.0) throw Error("prior-config", "weights must be in (0,1]");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw Error("prior-config", "weights must sum to 1");

  const int D = dim();
  chol_.clear();
  log_norm_.clear();
  for (int l = 0; l < L; ++l) {
    if (means[l].size() != D || covariances[l].rows() != D ||
        covariances[l].cols() != D)
      throw Error("prior-config", "component dimensions differ");
    Eigen::LLT<Eigen::MatrixXd> llt(covariances[l]);
    if (llt.info() != Eigen::Success)
      throw Error("prior-config", "covariance is not positive definite");
    double log_det = 0.0;
    for (int i = 0; i < D; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    log_norm_.push_back(std::log(weights[l]) - 0.5 * log_det -
                        0.5 * D * std::log(2.0 * M_PI));
    chol_.push_back(std::move(llt));
  }
}

Eigen::VectorXd GmmPrior::component_log_densities(const Eigen::VectorXd& x) const {
  if (chol_.empty()) throw Error("prior-config", "prior not finalized");
  const int L = num_components();
  Eigen::VectorXd out(L);
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd diff = x - means[l];
    double mahal = diff.dot(chol_[l].solve(diff));
    out(l) = log_norm_[l] - 0.5 * mahal;
  }
  return out;
}

double pose_prior_energy(const Eigen::VectorXd& x, const GmmPrior& gmm) {
  return -log_sum_exp(gmm.component_log_densities(x));
}

Eigen::VectorXd pose_prior_gradient(const Eigen::VectorXd& x, const GmmPrior& gmm) {
  Eigen::VectorXd log_p = gmm.component_log_densities(x);
  double lse = log_sum_exp(log_p);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
  for (int l = 0; l < gmm.num_components(); ++l) {
    double resp = std::exp(log_p(l) - lse);
    grad += resp * gmm.chol_[l].solve(x - gmm.means[l]);
  }
  return grad;
}

namespace {

struct JointObservation {
  const CameraView* camera;
  Vec2 pixel;
  double confidence;
};

std::vector<std::vector<JointObservation>> gather_observations(
    const PoseGroup& group, const std::vector<Pose2D>& poses,
    const std::vector<CameraView>& cameras) {
  std::map<int, const CameraView*> cam_of;
  for (const auto& cam : cameras) cam_of[cam.frame_id] = &cam;
  std::map<std::pair<int, int>, const Pose2D*> pose_of;
  for (const auto& p : poses) pose_of[{p.frame_id, p.pose_id}] = &p;

  std::vector<std::vector<JointObservation>> obs(kNumJoints);
  for (const auto& key : group.members) {
    auto pit = pose_of.find(key);
    if (pit == pose_of.end())
      throw Error("index-error", "group member has no matching pose");
    const Pose2D& pose = *pit->second;
    auto cit = cam_of.find(pose.frame_id);
    if (cit == cam_of.end())
      throw Error("missing-camera",
                  "no camera for frame " + std::to_string(pose.frame_id));
    for (int c = 0; c < kNumJoints; ++c)
      if (pose.visible[c])
        obs[c].push_back({cit->second, pose.joint_px(c, *cit->second),
                          pose.joint_confidence[c]});
  }
  return obs;
}

// Residual, Huber energy and optional 3-block gradient/GN contribution of
// one joint observation; returns false when the joint is behind the camera.
bool reprojection_terms(const Vec3& X, const JointObservation& o, double delta,
                        double* energy, Vec3* grad, Mat3* gauss_newton) {
  Vec3 pc = o.camera->to_camera(X);
  if (pc.z() <= 1e-9) return false;
  Vec2 proj(o.camera->fx * pc.x() / pc.z() + o.camera->cx,
            o.camera->fy * pc.y() / pc.z() + o.camera->cy);
  Vec2 r = proj - o.pixel;
  double t = r.norm();
  *energy += o.confidence * huber(t, delta);
  if (!grad && !gauss_newton) return true;

  Eigen::Matrix<double, 2, 3> dproj_dpc;
  dproj_dpc << o.camera->fx / pc.z(), 0, -o.camera->fx * pc.x() / (pc.z() * pc.z()),
      0, o.camera->fy / pc.z(), -o.camera->fy * pc.y() / (pc.z() * pc.z());
  Eigen::Matrix<double, 2, 3> Jx = dproj_dpc * o.camera->rotation;
  double wgt = o.confidence * huber_weight(t, delta);
  if (grad) *grad += wgt * Jx.transpose() * r;
  if (gauss_newton) *gauss_newton += wgt * Jx.transpose() * Jx;
  return true;
}

}  // namespace

double reprojection_energy(const Skeleton3D& skeleton, const PoseGroup& group,
                           const std::vector<Pose2D>& poses,
                           const std::vector<CameraView>& cameras,
                           double robust_delta_px) {
  if (skeleton.num_valid() == 0)
    throw Error("nothing-to-refine", "skeleton has no valid joint");
  auto obs = gather_observations(group, poses, cameras);
  double energy = 0.0;
  for (int c = 0; c < kNumJoints; ++c) {
    if (!skeleton.joint_valid[c]) continue;
    for (const auto& o : obs[c])
      reprojection_terms(skeleton.joints[c]->position, o, robust_delta_px,
                         &energy, nullptr, nullptr);
  }
  return energy;
}

double bundle_energy(const Eigen::VectorXd& x_full,
                     const std::vector<bool>& joint_valid,
                     const PoseGroup& group, const std::vector<Pose2D>& poses,
                     const std::vector<CameraView>& cameras,
                     const GmmPrior* gmm, const BundleAdjustParams& params,
                     Eigen::VectorXd* gradient) {
  auto obs = gather_observations(group, poses, cameras);
  if (gradient) gradient->setZero(x_full.size());

  double energy = 0.0;
  for (int c = 0; c < kNumJoints; ++c) {
    if (!joint_valid[c]) continue;
    Vec3 g = Vec3::Zero();
    for (const auto& o : obs[c])
      reprojection_terms(x_full.segment<3>(3 * c), o, params.robust_delta_px,
                         &energy, gradient ? &g : nullptr, nullptr);
    if (gradient) gradient->segment<3>(3 * c) += g;
  }

  if (gmm && params.lambda > 0.0) {
    NormalizedPose np = normalize_pose(x_full, gmm->normalization);
    energy += params.lambda * pose_prior_energy(np.y, *gmm);
    if (gradient) {
      Eigen::MatrixXd J = normalization_jacobian(x_full, gmm->normalization);
      *gradient += params.lambda * J.transpose() * pose_prior_gradient(np.y, *gmm);
    }
  }
  return energy;
}

Eigen::VectorXd impute_invalid_joints(const Skeleton3D& skeleton,
                                      const GmmPrior& gmm) {
  const int D = 3 * kNumJoints;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(D);
  for (int c = 0; c < kNumJoints; ++c)
    if (skeleton.joint_valid[c]) x.segment<3>(3 * c) = skeleton.joints[c]->position;
  if (skeleton.num_valid() == kNumJoints) return x;
  if (skeleton.num_valid() == 0)
    throw Error("nothing-to-refine", "skeleton has no valid joint");

  RootScale rs = partial_root_scale(x, skeleton.joint_valid, gmm.normalization);
  std::vector<int> observed, missing;
  for (int c = 0; c < kNumJoints; ++c)
    for (int k = 0; k < 3; ++k)
      (skeleton.joint_valid[c] ? observed : missing).push_back(3 * c + k);

  Eigen::VectorXd y_obs(observed.size());
  for (size_t i = 0; i < observed.size(); ++i)
    y_obs(static_cast<int>(i)) =
        (x(observed[i]) - rs.root(observed[i] % 3)) / rs.scale;

  // Most responsible component under the marginal of the observed block.
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> mu_obs(gmm.num_components());
  std::vector<Eigen::MatrixXd> sigma_oo(gmm.num_components());
  for (int l = 0; l < gmm.num_components(); ++l) {
    mu_obs[l].resize(observed.size());
    sigma_oo[l].resize(observed.size(), observed.size());
    for (size_t i = 0; i < observed.size(); ++i) {
      mu_obs[l](static_cast<int>(i)) = gmm.means[l](observed[i]);
      for (size_t j = 0; j < observed.size(); ++j)
        sigma_oo[l](static_cast<int>(i), static_cast<int>(j)) =
            gmm.covariances[l](observed[i], observed[j]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_oo[l]);
    if (llt.info() != Eigen::Success) continue;
    Eigen::VectorXd diff = y_obs - mu_obs[l];
    double log_det = 0.0;
    for (int i = 0; i < static_cast<int>(observed.size()); ++i)
      log_det += 2.0 * std::log(llt.matrixL()(i, i));
    double score = std::log(gmm.weights[l]) - 0.5 * log_det -
                   0.5 * diff.dot(llt.solve(diff));
    if (score > best_score) {
      best_score = score;
      best = l;
    }
  }

  // Conditional mean of the missing block for the chosen component.
  Eigen::MatrixXd sigma_mo(missing.size(), observed.size());
  for (size_t i = 0; i < missing.size(); ++i)
    for (size_t j = 0; j < observed.size(); ++j)
      sigma_mo(static_cast<int>(i), static_cast<int>(j)) =
          gmm.covariances[best](missing[i], observed[j]);
  Eigen::VectorXd y_missing =
      Eigen::VectorXd(missing.size());
  for (size_t i = 0; i < missing.size(); ++i)
    y_missing(static_cast<int>(i)) = gmm.means[best](missing[i]);
  y_missing += sigma_mo * Eigen::LLT<Eigen::MatrixXd>(sigma_oo[best])
                              .solve(y_obs - mu_obs[best]);

  for (size_t i = 0; i < missing.size(); ++i)
    x(missing[i]) = y_missing(static_cast<int>(i)) * rs.scale +
                    rs.root(missing[i] % 3);
  return x;
}

Skeleton3D bundle_adjust(const Skeleton3D& initial, const PoseGroup& group,
                         const std::vector<Pose2D>& poses,
                         const std::vector<CameraView>& cameras,
                         const GmmPrior* gmm, const BundleAdjustParams& params) {
  if (params.lambda < 0.0) throw Error("invalid-lambda", "lambda must be >= 0");
  if (initial.num_valid() == 0)
    throw Error("nothing-to-refine", "skeleton has no valid joint");

  const bool use_prior = gmm != nullptr && params.lambda > 0.0;
  Eigen::VectorXd x(3 * kNumJoints);
  if (use_prior) {
    x = impute_invalid_joints(initial, *gmm);
  } else {
    x.setZero();
    for (int c = 0; c < kNumJoints; ++c)
      if (initial.joint_valid[c]) x.segment<3>(3 * c) = initial.joints[c]->position;
  }

  std::vector<int> free_coords;
  for (int c = 0; c < kNumJoints; ++c)
    if (initial.joint_valid[c])
      for (int k = 0; k < 3; ++k) free_coords.push_back(3 * c + k);
  const int n = static_cast<int>(free_coords.size());

  auto obs = gather_observations(group, poses, cameras);

  auto gn_hessian = [&](const Eigen::VectorXd& xv) {
    Eigen::MatrixXd H_full = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (int c = 0; c < kNumJoints; ++c) {
      if (!initial.joint_valid[c]) continue;
      Mat3 block = Mat3::Zero();
      double dummy = 0.0;
      for (const auto& o : obs[c])
        reprojection_terms(xv.segment<3>(3 * c), o, params.robust_delta_px,
                           &dummy, nullptr, &block);
      H_full.block<3, 3>(3 * c, 3 * c) += block;
    }
    if (use_prior) {
      Eigen::VectorXd log_p = gmm->component_log_densities(
          normalize_pose(xv, gmm->normalization).y);
      double lse = log_p.maxCoeff() + std::log((log_p.array() - log_p.maxCoeff())
                                                   .exp()
                                                   .sum());
      Eigen::MatrixXd prec =
          Eigen::MatrixXd::Zero(x.size(), x.size());
      for (int l = 0; l < gmm->num_components(); ++l)
        prec += std::exp(log_p(l) - lse) *
                gmm->covariances[l].llt().solve(
                    Eigen::MatrixXd::Identity(x.size(), x.size()));
      Eigen::MatrixXd J = normalization_jacobian(xv, gmm->normalization);
      H_full += params.lambda * J.transpose() * prec * J;
    }
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H(i, j) = H_full(free_coords[i], free_coords[j]);
    return H;
  };

  Eigen::VectorXd grad_full;
  double energy = bundle_energy(x, initial.joint_valid, group, poses, cameras,
                                use_prior ? gmm : nullptr, params, &grad_full);
  const double initial_energy = energy;

  double damping = 1e-4;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = grad_full(free_coords[i]);
    if (g.norm() < 1e-12) break;

    Eigen::MatrixXd H = gn_hessian(x);
    bool accepted = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::MatrixXd Hd = H + damping * Eigen::MatrixXd::Identity(n, n);
      Eigen::VectorXd step = Hd.ldlt().solve(-g);
      Eigen::VectorXd x_trial = x;
      for (int i = 0; i < n; ++i) x_trial(free_coords[i]) += step(i);
      Eigen::VectorXd grad_trial;
      double energy_trial =
          bundle_energy(x_trial, initial.joint_valid, group, poses, cameras,
                        use_prior ? gmm : nullptr, params, &grad_trial);
      if (std::isfinite(energy_trial) && energy_trial < energy) {
        double rel_change = (energy - energy_trial) / std::max(1.0, energy);
        x = std::move(x_trial);
        grad_full = std::move(grad_trial);
        energy = energy_trial;
        damping = std::max(damping / 3.0, 1e-10);
        accepted = true;
        if (rel_change < params.relative_tolerance) iter = params.max_iterations;
        break;
      }
      damping *= 10.0;
    }
    if (!accepted) break;
  }
  if (energy > initial_energy)
    throw Error("invariant-breach", "bundle adjustment increased the energy");

  Skeleton3D result = initial;
  double residual_sum = 0.0;
  int valid = 0;
  for (int c = 0; c < kNumJoints; ++c) {
    if (!result.joint_valid[c]) continue;
    Point3D& p = *result.joints[c];
    p.position = x.segment<3>(3 * c);
    double dist_sum = 0.0;
    int n_obs = 0;
    for (const auto& o : obs[c]) {
      Vec3 pc = o.camera->to_camera(p.position);
      if (pc.z() <= 1e-9) continue;
      Vec2 proj(o.camera->fx * pc.x() / pc.z() + o.camera->cx,
                o.camera->fy * pc.y() / pc.z() + o.camera->cy);
      dist_sum += (proj - o.pixel).norm();
      ++n_obs;
    }
    if (n_obs > 0) p.residual = dist_sum / n_obs;
    residual_sum += p.residual;
    ++valid;
  }
  if (valid > 0) result.mean_reprojection_px = residual_sum / valid;
  return result;
}

GmmPrior fit_gmm(const std::vector<Eigen::VectorXd>& corpus, int num_components,
                 std::uint64_t seed, const PoseNormalization& normalization,
                 std::vector<double>* log_likelihood_history) {
  const int L = num_components;
  const int N = static_cast<int>(corpus.size());
  if (L < 1) throw Error("fit-error", "need at least one component");
  if (N < 10 * L)
    throw Error("corpus-too-small", "corpus must hold at least 10 samples per "
                                    "component");
  const int D = static_cast<int>(corpus[0].size());
  for (const auto& v : corpus)
    if (v.size() != D) throw Error("fit-error", "corpus vectors differ in size");

  std::mt19937_64 rng(seed);
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // k-means initialization
  std::vector<Eigen::VectorXd> centers(L);
  for (int l = 0; l < L; ++l) centers[l] = corpus[order[l]];
  std::vector<int> label(N, 0);
  for (int it = 0; it < 25; ++it) {
    bool changed = false;
    for (int i = 0; i < N; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int l = 0; l < L; ++l) {
        double d = (corpus[i] - centers[l]).squaredNorm();
        if (d < best_d) { best_d = d; best = l; }
      }
      if (best != label[i]) { label[i] = best; changed = true; }
    }
    for (int l = 0; l < L; ++l) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
      int count = 0;
      for (int i = 0; i < N; ++i)
        if (label[i] == l) { sum += corpus[i]; ++count; }
      if (count > 0) centers[l] = sum / count;
    }
    if (!changed) break;
  }

  GmmPrior gmm;
  gmm.normalization = normalization;
  gmm.weights.assign(L, 0.0);
  gmm.means = centers;
  gmm.covariances.assign(L, Eigen::MatrixXd::Zero(D, D));
  {
    std::vector<int> counts(L, 0);
    for (int i = 0; i < N; ++i) ++counts[label[i]];
    for (int l = 0; l < L; ++l) {
      gmm.weights[l] = std::max(counts[l], 1) / static_cast<double>(N);
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(D, D);
      for (int i = 0; i < N; ++i) {
        if (label[i] != l) continue;
        Eigen::VectorXd d = corpus[i] - gmm.means[l];
        cov += d * d.transpose();
      }
      cov /= std::max(counts[l], 1);
      gmm.covariances[l] = cov + kCovarianceFloor * Eigen::MatrixXd::Identity(D, D);
    }
    double wsum = std::accumulate(gmm.weights.begin(), gmm.weights.end(), 0.0);
    for (auto& w : gmm.weights) w /= wsum;
  }

  Eigen::MatrixXd resp(N, L);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    try {
      gmm.finalize();
    } catch (const Error&) {
      throw Error("fit-error", "degenerate corpus produced a singular covariance");
    }

    // E-step with the log-likelihood of the current parameters
    double ll = 0.0;
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd log_p = gmm.component_log_densities(corpus[i]);
      double lse = log_sum_exp(log_p);
      ll += lse;
      for (int l = 0; l < L; ++l) resp(i, l) = std::exp(log_p(l) - lse);
    }
    if (!std::isfinite(ll))
      throw Error("fit-error", "log-likelihood diverged");
    if (log_likelihood_history) log_likelihood_history->push_back(ll);
    if (iter > 0 && ll - prev_ll < 1e-9 * std::abs(prev_ll) + 1e-12) break;
    prev_ll = ll;

    // M-step
    for (int l = 0; l < L; ++l) {
      double nl = resp.col(l).sum();
      if (nl < 1e-10) throw Error("fit-error", "component collapsed to zero weight");
      gmm.weights[l] = nl / N;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(D);
      for (int i = 0; i < N; ++i) mean += resp(i, l) * corpus[i];
      mean /= nl;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(D, D);
      for (int i = 0; i < N; ++i) {
        Eigen::VectorXd d = corpus[i] - mean;
        cov += resp(i, l) * d * d.transpose();
      }
      cov /= nl;
      gmm.means[l] = mean;
      gmm.covariances[l] = cov + kCovarianceFloor * Eigen::MatrixXd::Identity(D, D);
    }
  }
  gmm.finalize();
  return gmm;
}

double calibrate_scale(const Skeleton3D& skeleton, const BoneTable& bones) {
  bones.validate();
  double num = 0.0, den = 0.0;
  int used = 0;
  for (size_t i = 0; i < bones.edges.size(); ++i) {
    auto [a, b] = bones.edges[i];
    if (!skeleton.joint_valid[a] || !skeleton.joint_valid[b]) continue;
    double l = (skeleton.joints[a]->position - skeleton.joints[b]->position).norm();
    num += bones.mean_lengths[i] * l;
    den += l * l;
    ++used;
  }
  if (used == 0 || den <= 0.0)
    throw Error("no-bones", "no bone has both endpoint joints valid");
  return num / den;
}

}  // namespace mvm
