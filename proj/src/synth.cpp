#include "mvm/synth.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <random>

namespace mvm {

namespace {

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b * 0x9e3779b97f4a7c15ULL);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CameraView look_at_camera(int frame_id, const Vec3& position, const Vec3& target,
                          const SceneSpec& spec) {
  Vec3 z = (target - position).normalized();
  Vec3 up(0.0, 0.0, 1.0);
  Vec3 x = up.cross(z).normalized();
  Vec3 y = z.cross(x);
  CameraView cam;
  cam.frame_id = frame_id;
  cam.fx = cam.fy = spec.focal_px;
  cam.cx = spec.image_width / 2.0;
  cam.cy = spec.image_height / 2.0;
  cam.width = spec.image_width;
  cam.height = spec.image_height;
  cam.rotation.row(0) = x;
  cam.rotation.row(1) = y;
  cam.rotation.row(2) = z;
  cam.translation = -cam.rotation * position;
  cam.validate();
  return cam;
}

}  // namespace

void SceneSpec::validate() const {
  if (num_people < 1) throw Error("invalid-scene-spec", "num_people must be >= 1");
  if (num_frames < 2) throw Error("invalid-scene-spec", "num_frames must be >= 2");
  if (arc_degrees <= 0.0 || arc_degrees > 360.0)
    throw Error("invalid-scene-spec", "arc_degrees must be in (0, 360]");
  if (noise.outlier_rate < 0.0 || noise.outlier_rate > 1.0 ||
      noise.miss_rate < 0.0 || noise.miss_rate > 1.0)
    throw Error("invalid-scene-spec", "rates must be in [0,1]");
  if (noise.pixel_sigma < 0.0 || noise.descriptor_noise < 0.0)
    throw Error("invalid-scene-spec", "noise magnitudes must be non-negative");
  if ((region_max - region_min).head<2>().minCoeff() < 0.0)
    throw Error("invalid-scene-spec", "placement region is inverted");
  if (radius <= 0.0 || focal_px <= 0.0 || image_width <= 0 || image_height <= 0)
    throw Error("invalid-scene-spec", "camera parameters must be positive");
}

GroundTruthScene sample_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(mix64(spec.seed, 0x5ce9e));
  std::uniform_real_distribution<double> ux(spec.region_min.x(), spec.region_max.x());
  std::uniform_real_distribution<double> uy(spec.region_min.y(), spec.region_max.y());
  std::uniform_real_distribution<double> uyaw(0.0, 2.0 * M_PI);
  std::normal_distribution<double> jitter(0.0, 1.0);

  const double person_radius = 0.5;  // exclusion circle per person, scene units

  GroundTruthScene scene;
  std::vector<Vec2> placed;
  for (int p = 0; p < spec.num_people; ++p) {
    Vec2 pos;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      pos = {ux(rng), uy(rng)};
      ok = true;
      for (const auto& q : placed)
        if ((pos - q).norm() < 2.0 * person_radius) { ok = false; break; }
    }
    if (!ok)
      throw Error("placement-error",
                  "could not place people without overlap in the region");
    placed.push_back(pos);

    double yaw = uyaw(rng);
    Mat3 R;
    R << std::cos(yaw), -std::sin(yaw), 0, std::sin(yaw), std::cos(yaw), 0, 0, 0, 1;

    Skeleton3D sk;
    sk.person_id = p;
    for (int c = 0; c < kNumJoints; ++c) {
      Vec3 base = R * template_pose()[c] + Vec3(pos.x(), pos.y(), spec.region_min.z());
      if (spec.pose_jitter > 0.0)
        base += spec.pose_jitter * Vec3(jitter(rng), jitter(rng), jitter(rng));
      Point3D pt;
      pt.position = base;
      sk.joints[c] = pt;
      sk.joint_valid[c] = true;
    }
    scene.skeletons.push_back(std::move(sk));
  }

  // Inward-looking arc at the camera height, so consecutive optical axes
  // are separated by exactly arc/(num_frames-1).
  Vec3 center = 0.5 * (spec.region_min + spec.region_max);
  scene.look_at = Vec3(center.x(), center.y(), spec.height);
  double arc = spec.arc_degrees * M_PI / 180.0;
  for (int i = 0; i < spec.num_frames; ++i) {
    double theta = -arc / 2.0 + arc * i / (spec.num_frames - 1);
    Vec3 pos = scene.look_at +
               spec.radius * Vec3(std::cos(theta), std::sin(theta), 0.0);
    scene.cameras.push_back(look_at_camera(i, pos, scene.look_at, spec));
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int p = 0; p < spec.num_people; ++p) {
    Eigen::VectorXd d(spec.noise.descriptor_dim);
    for (int k = 0; k < spec.noise.descriptor_dim; ++k) d(k) = gauss(rng);
    scene.true_descriptors.push_back(d.normalized());
  }
  return scene;
}

RenderedScene render_observations(const GroundTruthScene& scene,
                                  const SceneSpec& spec) {
  spec.validate();
  RenderedScene out;
  for (const auto& cam : scene.cameras) {
    int next_pose_id = 0;
    for (size_t p = 0; p < scene.skeletons.size(); ++p) {
      // Independent stream per (frame, person) keeps noise stable under
      // any change in emission order.
      std::mt19937_64 rng(
          mix64(mix64(spec.seed, cam.frame_id + 1), p + 0x7f17));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
      std::uniform_real_distribution<double> conf_clean(0.7, 1.0);
      std::uniform_real_distribution<double> conf_bad(0.1, 0.5);

      Pose2D pose;
      pose.frame_id = cam.frame_id;
      pose.joints.assign(kNumJoints, Vec2::Zero());
      pose.joint_confidence.assign(kNumJoints, 0.0);
      pose.visible.assign(kNumJoints, false);

      int n_visible = 0;
      for (int c = 0; c < kNumJoints; ++c) {
        Vec2 px;
        try {
          px = project(scene.skeletons[p].joints[c]->position, cam);
        } catch (const Error&) {
          continue;  // behind the camera
        }
        bool missed = uni(rng) < spec.noise.miss_rate;
        bool outlier = uni(rng) < spec.noise.outlier_rate;
        if (spec.noise.pixel_sigma > 0.0)
          px += spec.noise.pixel_sigma * Vec2(gauss(rng), gauss(rng));
        if (outlier) {
          double a = angle(rng);
          px += spec.noise.outlier_offset_px * Vec2(std::cos(a), std::sin(a));
        }
        double confidence = outlier ? conf_bad(rng) : conf_clean(rng);
        if (missed) continue;
        if (px.x() < 0.0 || px.x() > cam.width || px.y() < 0.0 || px.y() > cam.height)
          continue;  // left the image
        pose.joints[c] = {px.x() / cam.width, px.y() / cam.height};
        pose.joint_confidence[c] = confidence;
        pose.visible[c] = true;
        ++n_visible;
      }
      if (n_visible == 0) continue;
      pose.pose_id = next_pose_id++;
      pose.finalize();

      Eigen::VectorXd d = scene.true_descriptors[p];
      if (spec.noise.descriptor_noise > 0.0) {
        for (int k = 0; k < d.size(); ++k)
          d(k) += spec.noise.descriptor_noise * gauss(rng);
      }
      out.descriptors[{pose.frame_id, pose.pose_id}] =
          AppearanceDescriptor::from_raw(d);
      out.labels[{pose.frame_id, pose.pose_id}] = static_cast<int>(p);
      out.poses.push_back(std::move(pose));
    }
  }
  return out;
}

}  // namespace mvm
