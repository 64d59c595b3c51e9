#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "mvm/metrics.hpp"
#include "test_helpers.hpp"

using namespace mvm;
using mvm::testing::arc_cameras;
using mvm::testing::person_at;
using mvm::testing::project_pose;

namespace {

Skeleton3D skeleton_from(const std::vector<Vec3>& joints) {
  Skeleton3D sk;
  sk.person_id = 0;
  for (size_t j = 0; j < joints.size(); ++j) {
    Point3D p;
    p.position = joints[j];
    sk.joints[j] = p;
    sk.joint_valid[j] = true;
  }
  return sk;
}

PoseGroup full_group(const std::vector<CameraView>& cams, int pose_id = 0) {
  PoseGroup g;
  g.person_id = pose_id;
  for (const auto& cam : cams) g.members.push_back({cam.frame_id, pose_id});
  return g;
}

Partition partition_of(const std::vector<std::vector<std::pair<int, int>>>& groups) {
  Partition p;
  for (const auto& g : groups) {
    PoseGroup pg;
    pg.person_id = static_cast<int>(p.groups.size());
    pg.members = g;
    p.groups.push_back(pg);
  }
  return p;
}

}  // namespace

TEST_CASE("reprojection error: zero at the truth, exact for one offset") {
  auto cams = arc_cameras(4, 50.0, 6.0, {0, 0, 1});
  auto joints = person_at({0, 0, 0});
  std::vector<Pose2D> poses;
  for (const auto& cam : cams) poses.push_back(project_pose(joints, cam, 0));
  Skeleton3D sk = skeleton_from(joints);
  CHECK(reprojection_error_px(sk, full_group(cams), poses, cams) < 1e-6);

  // one observation pushed 4 px: mean over 4*17 observations
  Vec2 px = poses[1].joint_px(kNose, cams[1]);
  poses[1].joints[kNose] = {(px.x() + 4.0) / cams[1].width, px.y() / cams[1].height};
  double e = reprojection_error_px(sk, full_group(cams), poses, cams);
  CHECK(e == doctest::Approx(4.0 / (4 * kNumJoints)).epsilon(1e-6));
}

TEST_CASE("reprojection error: isotropic noise gives the Rayleigh mean") {
  auto cams = arc_cameras(10, 90.0, 6.0, {0, 0, 1});
  auto joints = person_at({0, 0, 0});
  std::mt19937_64 rng(137);
  const double sigma = 2.0;
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Pose2D> poses;
  for (const auto& cam : cams) {
    Pose2D p = project_pose(joints, cam, 0);
    for (int c = 0; c < kNumJoints; ++c)
      p.joints[c] += Vec2(noise(rng) / cam.width, noise(rng) / cam.height);
    poses.push_back(p);
  }
  double e = reprojection_error_px(skeleton_from(joints), full_group(cams), poses, cams);
  double rayleigh_mean = sigma * std::sqrt(M_PI / 2.0);  // ~2.507 px
  CHECK(e == doctest::Approx(rayleigh_mean).epsilon(0.15));
}

TEST_CASE("reprojection error: no support is an error") {
  auto cams = arc_cameras(2, 30.0, 6.0, {0, 0, 1});
  auto joints = person_at({0, 0, 0});
  std::vector<Pose2D> poses;
  for (const auto& cam : cams) poses.push_back(project_pose(joints, cam, 0));
  Skeleton3D empty;  // no valid joints
  try {
    reprojection_error_px(empty, full_group(cams), poses, cams);
    FAIL("expected no-support");
  } catch (const Error& e) {
    CHECK(e.code() == "no-support");
  }
}

TEST_CASE("c_var: zero for noiseless detections, grows with noise") {
  auto cams = arc_cameras(5, 60.0, 6.0, {0, 0, 1});
  auto joints = person_at({0, 0, 0});
  std::vector<Pose2D> clean;
  for (const auto& cam : cams) clean.push_back(project_pose(joints, cam, 0));
  CHECK(c_var(clean, cams, 0.5) < 1e-9);

  auto noisy_cvar = [&](double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<Pose2D> noisy;
    for (const auto& cam : cams) {
      Pose2D p = project_pose(joints, cam, 0);
      for (int c = 0; c < kNumJoints; ++c)
        p.joints[c] += Vec2(noise(rng) / cam.width, noise(rng) / cam.height);
      noisy.push_back(p);
    }
    return c_var(noisy, cams, 0.5);
  };
  double low = 0.0, high = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    low += noisy_cvar(1.0, 100 + s);
    high += noisy_cvar(4.0, 200 + s);
  }
  CHECK(low > 0.0);
  CHECK(high > low);
}

TEST_CASE("c_var: the confidence gate removes corrupted pairs") {
  auto cams = arc_cameras(4, 50.0, 6.0, {0, 0, 1});
  auto joints = person_at({0, 0, 0});
  std::vector<Pose2D> poses;
  for (const auto& cam : cams) poses.push_back(project_pose(joints, cam, 0));
  // frame 2: shift all joints 40 px and mark them low-confidence
  for (int c = 0; c < kNumJoints; ++c) {
    poses[2].joints[c] += Vec2(40.0 / cams[2].width, 0.0);
    poses[2].joint_confidence[c] = 0.2;
  }
  poses[2].finalize();
  double gated = c_var(poses, cams, 0.5);
  double ungated = c_var(poses, cams, 0.0);
  CHECK(gated < 1e-9);
  CHECK(ungated > 1e-4);
}

TEST_CASE("c_var: undefined without an admissible pair") {
  auto cams = arc_cameras(2, 30.0, 6.0, {0, 0, 1});
  auto joints = person_at({0, 0, 0});
  std::vector<Pose2D> one{project_pose(joints, cams[0], 0)};
  CHECK_THROWS_AS(c_var(one, cams, 0.5), Error);

  // two detections in the same frame: no cross-view pair exists
  std::vector<Pose2D> same{project_pose(joints, cams[0], 0),
                           project_pose(person_at({1, 0, 0}), cams[0], 1)};
  try {
    c_var(same, cams, 0.5);
    FAIL("expected undefined-metric");
  } catch (const Error& e) {
    CHECK(e.code() == "undefined-metric");
  }
}

TEST_CASE("pa_mpjpe: zero on itself and under any similarity transform") {
  auto joints = person_at({0, 0, 0});
  Skeleton3D gt = skeleton_from(joints);
  CHECK(pa_mpjpe(gt, gt) < 1e-9);

  Eigen::AngleAxisd rot(1.1, Vec3(0.2, -0.5, 1.0).normalized());
  std::vector<Vec3> moved;
  for (const auto& j : joints)
    moved.push_back(2.3 * (rot.toRotationMatrix() * j) + Vec3(4.0, -1.0, 2.0));
  CHECK(pa_mpjpe(skeleton_from(moved), gt) < 1e-9);
}

TEST_CASE("pa_mpjpe: reflections are not allowed to hide errors") {
  auto joints = person_at({0, 0, 0});
  std::vector<Vec3> mirrored;
  for (const auto& j : joints) mirrored.push_back(Vec3(-j.x(), j.y(), j.z()));
  // a mirrored skeleton is not a rotation of the original
  CHECK(pa_mpjpe(skeleton_from(mirrored), skeleton_from(joints)) > 0.01);
}

TEST_CASE("pa_mpjpe: agrees with an external similarity alignment") {
  auto joints = person_at({0, 0, 0});
  Skeleton3D gt = skeleton_from(joints);
  std::mt19937_64 rng(61);
  std::normal_distribution<double> noise(0.0, 0.03);
  std::vector<Vec3> pred;
  for (const auto& j : joints)
    pred.push_back(j + Vec3(noise(rng), noise(rng), noise(rng)));

  double got = pa_mpjpe(skeleton_from(pred), gt);

  Eigen::MatrixXd X(3, kNumJoints), Y(3, kNumJoints);
  for (int c = 0; c < kNumJoints; ++c) {
    X.col(c) = pred[c];
    Y.col(c) = joints[c];
  }
  Eigen::Matrix4d T = Eigen::umeyama(X, Y, true);
  double expect = 0.0;
  for (int c = 0; c < kNumJoints; ++c) {
    Eigen::Vector4d h(pred[c].x(), pred[c].y(), pred[c].z(), 1.0);
    expect += ((T * h).head<3>() - joints[c]).norm();
  }
  expect /= kNumJoints;
  CHECK(got == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("pa_mpjpe: degenerate support is rejected") {
  Skeleton3D gt = skeleton_from(person_at({0, 0, 0}));
  Skeleton3D two;
  two.person_id = 0;
  for (int c = 0; c < 2; ++c) {
    Point3D p;
    p.position = Vec3(c, 0, 0);
    two.joints[c] = p;
    two.joint_valid[c] = true;
  }
  CHECK_THROWS_AS(pa_mpjpe(two, gt), Error);

  // collinear points
  std::vector<Vec3> line;
  for (int c = 0; c < kNumJoints; ++c) line.push_back(Vec3(c, 0, 0));
  try {
    pa_mpjpe(skeleton_from(line), skeleton_from(line));
    FAIL("expected alignment-error");
  } catch (const Error& e) {
    CHECK(e.code() == "alignment-error");
  }
}

TEST_CASE("clustering_f1: exact, fragmented and fully wrong partitions") {
  std::map<std::pair<int, int>, int> labels;
  for (int f = 0; f < 3; ++f) {
    labels[{f, 0}] = 0;
    labels[{f, 1}] = 1;
  }
  auto perfect = partition_of({{{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 1}, {2, 1}}});
  CHECK(clustering_f1(perfect, labels) == doctest::Approx(1.0));

  // person 0 split 2+1: tp=1+3=4? no: pairs within person0 groups: {0,1}=1;
  // person 1 intact: 3 pairs -> tp=4, fp=0, fn=2 -> P=1, R=2/3, F1=0.8
  auto split = partition_of(
      {{{0, 0}, {1, 0}}, {{2, 0}}, {{0, 1}, {1, 1}, {2, 1}}});
  CHECK(clustering_f1(split, labels) == doctest::Approx(0.8));

  // identity swap between the people: no predicted pair is correct
  auto swapped = partition_of({{{0, 0}, {1, 1}}, {{0, 1}, {1, 0}}, {{2, 0}}, {{2, 1}}});
  CHECK(clustering_f1(swapped, labels) == doctest::Approx(0.0));
}

TEST_CASE("clustering_f1: unassigned detections count as singletons") {
  std::map<std::pair<int, int>, int> labels{
      {{0, 0}, 0}, {{1, 0}, 0}, {{2, 0}, 0}};
  Partition p = partition_of({{{0, 0}, {1, 0}}});
  p.unassigned.push_back({2, 0});
  // tp=1, fp=0, fn=2 -> P=1, R=1/3 -> F1=0.5
  CHECK(clustering_f1(p, labels) == doctest::Approx(0.5));
}

TEST_CASE("clustering_f1: labels must be covered by the partition") {
  std::map<std::pair<int, int>, int> labels{{{0, 0}, 0}, {{5, 5}, 1}};
  auto p = partition_of({{{0, 0}}});
  CHECK_THROWS_AS(clustering_f1(p, labels), Error);
}
