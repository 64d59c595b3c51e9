#include "mvm/io.hpp"

#include <Eigen/Geometry>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mvm {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path, const char* expected_version) {
  std::ifstream in(path);
  if (!in)
    throw Error("parse-error", path.string() + ": cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("version", "") != expected_version)
    throw Error("parse-error",
                path.string() + ": missing or wrong version, expected " +
                    std::string(expected_version));
  return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", path.string() + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_to_vec(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
  return v;
}

}  // namespace

std::vector<CameraView> load_cameras(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  std::vector<CameraView> cameras;
  try {
    for (const auto& c : j.at("cameras")) {
      CameraView cam;
      cam.frame_id = c.at("frame_id").get<int>();
      cam.fx = c.at("fx").get<double>();
      cam.fy = c.at("fy").get<double>();
      cam.cx = c.at("cx").get<double>();
      cam.cy = c.at("cy").get<double>();
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      const auto& r = c.at("rotation");
      if (r.size() != 9)
        throw Error("parse-error", path.string() + ": rotation must have 9 entries");
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          cam.rotation(i, k) = r[3 * i + k].get<double>();
      const auto& t = c.at("translation");
      for (int i = 0; i < 3; ++i) cam.translation(i) = t.at(i).get<double>();
      cam.validate();
      cameras.push_back(cam);
    }
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  return cameras;
}

void save_cameras(const std::vector<CameraView>& cameras,
                  const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion}, {"cameras", json::array()}};
  for (const auto& cam : cameras) {
    json r = json::array();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) r.push_back(cam.rotation(i, k));
    j["cameras"].push_back({{"frame_id", cam.frame_id},
                            {"fx", cam.fx},
                            {"fy", cam.fy},
                            {"cx", cam.cx},
                            {"cy", cam.cy},
                            {"width", cam.width},
                            {"height", cam.height},
                            {"rotation", r},
                            {"translation",
                             {cam.translation.x(), cam.translation.y(),
                              cam.translation.z()}}});
  }
  write_json(j, path);
}

std::vector<Pose2D> load_poses(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  std::vector<Pose2D> poses;
  try {
    int C = j.at("num_joints").get<int>();
    if (C != kNumJoints)
      throw Error("parse-error", path.string() + ": expected " +
                                     std::to_string(kNumJoints) + " joints");
    for (const auto& p : j.at("poses")) {
      Pose2D pose;
      pose.frame_id = p.at("frame_id").get<int>();
      pose.pose_id = p.at("pose_id").get<int>();
      for (const auto& pt : p.at("joints"))
        pose.joints.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      for (const auto& c : p.at("confidence"))
        pose.joint_confidence.push_back(c.get<double>());
      for (const auto& v : p.at("visible")) pose.visible.push_back(v.get<bool>());
      pose.finalize();
      poses.push_back(std::move(pose));
    }
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  return poses;
}

void save_poses(const std::vector<Pose2D>& poses,
                const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion},
         {"num_joints", kNumJoints},
         {"poses", json::array()}};
  for (const auto& p : poses) {
    json joints = json::array(), conf = json::array(), vis = json::array();
    for (int c = 0; c < kNumJoints; ++c) {
      joints.push_back({p.joints[c].x(), p.joints[c].y()});
      conf.push_back(p.joint_confidence[c]);
      vis.push_back(static_cast<bool>(p.visible[c]));
    }
    j["poses"].push_back({{"frame_id", p.frame_id},
                          {"pose_id", p.pose_id},
                          {"joints", joints},
                          {"confidence", conf},
                          {"visible", vis}});
  }
  write_json(j, path);
}

std::map<std::pair<int, int>, AppearanceDescriptor> load_descriptors(
    const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  std::map<std::pair<int, int>, AppearanceDescriptor> out;
  try {
    long dim = -1;
    for (const auto& d : j.at("descriptors")) {
      Eigen::VectorXd v = json_to_vec(d.at("vector"));
      if (dim < 0) dim = v.size();
      if (v.size() != dim)
        throw Error("parse-error",
                    path.string() + ": descriptor vectors differ in length");
      out[{d.at("frame_id").get<int>(), d.at("pose_id").get<int>()}] =
          AppearanceDescriptor::from_raw(v);
    }
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  return out;
}

void save_descriptors(
    const std::map<std::pair<int, int>, AppearanceDescriptor>& descriptors,
    const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion}, {"descriptors", json::array()}};
  for (const auto& [key, d] : descriptors)
    j["descriptors"].push_back({{"frame_id", key.first},
                                {"pose_id", key.second},
                                {"vector", vec_to_json(d.vector)}});
  write_json(j, path);
}

Partition load_groups(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  Partition p;
  try {
    for (const auto& g : j.at("groups")) {
      PoseGroup pg;
      pg.person_id = g.at("person_id").get<int>();
      for (const auto& m : g.at("members"))
        pg.members.push_back(
            {m.at("frame_id").get<int>(), m.at("pose_id").get<int>()});
      pg.member_scores.assign(pg.members.size(), 0.0);
      p.groups.push_back(std::move(pg));
    }
    for (const auto& m : j.at("unassigned"))
      p.unassigned.push_back(
          {m.at("frame_id").get<int>(), m.at("pose_id").get<int>()});
    p.objective = j.value("objective", 0.0);
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  return p;
}

void save_groups(const Partition& partition, const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion},
         {"objective", partition.objective},
         {"groups", json::array()},
         {"unassigned", json::array()}};
  for (const auto& g : partition.groups) {
    json members = json::array();
    double contribution = 0.0;
    for (size_t i = 0; i < g.members.size(); ++i) {
      members.push_back(
          {{"frame_id", g.members[i].first}, {"pose_id", g.members[i].second}});
      if (i < g.member_scores.size()) contribution += g.member_scores[i];
    }
    j["groups"].push_back({{"person_id", g.person_id},
                           {"members", members},
                           {"objective_contribution", contribution}});
  }
  for (const auto& m : partition.unassigned)
    j["unassigned"].push_back({{"frame_id", m.first}, {"pose_id", m.second}});
  write_json(j, path);
}

namespace {

json skeletons_to_json(const std::vector<Skeleton3D>& skeletons) {
  json arr = json::array();
  for (const auto& s : skeletons) {
    json joints = json::array(), valid = json::array(), reasons = json::array();
    for (int c = 0; c < kNumJoints; ++c) {
      if (s.joint_valid[c]) {
        const Vec3& p = s.joints[c]->position;
        joints.push_back({p.x(), p.y(), p.z()});
      } else {
        joints.push_back(nullptr);
      }
      valid.push_back(static_cast<bool>(s.joint_valid[c]));
      reasons.push_back(s.failure_reasons[c]);
    }
    arr.push_back({{"person_id", s.person_id},
                   {"joints", joints},
                   {"valid", valid},
                   {"reasons", reasons},
                   {"mean_reprojection_px", s.mean_reprojection_px},
                   {"total_2d_joints_used", s.total_2d_joints_used}});
  }
  return arr;
}

std::vector<Skeleton3D> skeletons_from_json(const json& arr,
                                            const std::string& file) {
  std::vector<Skeleton3D> out;
  for (const auto& s : arr) {
    Skeleton3D sk;
    sk.person_id = s.at("person_id").get<int>();
    const auto& joints = s.at("joints");
    const auto& valid = s.at("valid");
    if (joints.size() != kNumJoints || valid.size() != kNumJoints)
      throw Error("parse-error", file + ": skeleton must have " +
                                     std::to_string(kNumJoints) + " joints");
    for (int c = 0; c < kNumJoints; ++c) {
      sk.joint_valid[c] = valid[c].get<bool>();
      if (sk.joint_valid[c]) {
        Point3D p;
        p.position = {joints[c].at(0).get<double>(), joints[c].at(1).get<double>(),
                      joints[c].at(2).get<double>()};
        sk.joints[c] = p;
      }
      if (s.contains("reasons")) sk.failure_reasons[c] = s["reasons"][c];
    }
    sk.mean_reprojection_px = s.value("mean_reprojection_px", 0.0);
    sk.total_2d_joints_used = s.value("total_2d_joints_used", 0);
    out.push_back(std::move(sk));
  }
  return out;
}

}  // namespace

std::vector<Skeleton3D> load_skeletons(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  try {
    return skeletons_from_json(j.at("skeletons"), path.string());
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
}

void save_skeletons(const std::vector<Skeleton3D>& skeletons,
                    const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion},
         {"num_joints", kNumJoints},
         {"skeletons", skeletons_to_json(skeletons)}};
  write_json(j, path);
}

GmmPrior load_gmm(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  GmmPrior gmm;
  try {
    for (const auto& w : j.at("weights")) gmm.weights.push_back(w.get<double>());
    for (const auto& m : j.at("means")) gmm.means.push_back(json_to_vec(m));
    for (const auto& c : j.at("covariances")) {
      const int D = static_cast<int>(c.size());
      Eigen::MatrixXd cov(D, D);
      for (int i = 0; i < D; ++i)
        for (int k = 0; k < D; ++k) cov(i, k) = c[i][k].get<double>();
      gmm.covariances.push_back(std::move(cov));
    }
    const auto& n = j.at("normalization");
    gmm.normalization.root_joint_index = n.at("root_joint_index").get<int>();
    gmm.normalization.edges.clear();
    for (const auto& e : n.at("edges"))
      gmm.normalization.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  gmm.finalize();
  return gmm;
}

void save_gmm(const GmmPrior& gmm, const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion}, {"L", gmm.num_components()}};
  j["weights"] = gmm.weights;
  j["means"] = json::array();
  for (const auto& m : gmm.means) j["means"].push_back(vec_to_json(m));
  j["covariances"] = json::array();
  for (const auto& c : gmm.covariances) {
    json rows = json::array();
    for (int i = 0; i < c.rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < c.cols(); ++k) row.push_back(c(i, k));
      rows.push_back(row);
    }
    j["covariances"].push_back(rows);
  }
  json edges = json::array();
  for (auto [a, b] : gmm.normalization.edges) edges.push_back({a, b});
  j["normalization"] = {{"root_joint_index", gmm.normalization.root_joint_index},
                        {"edges", edges}};
  write_json(j, path);
}

BoneTable load_bones(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  BoneTable bones;
  try {
    for (const auto& e : j.at("edges"))
      bones.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    for (const auto& l : j.at("mean_lengths"))
      bones.mean_lengths.push_back(l.get<double>());
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  bones.validate();
  return bones;
}

void save_bones(const BoneTable& bones, const std::filesystem::path& path) {
  json edges = json::array();
  for (auto [a, b] : bones.edges) edges.push_back({a, b});
  write_json({{"version", kSchemaVersion},
              {"edges", edges},
              {"mean_lengths", bones.mean_lengths}},
             path);
}

void save_eval_report(const EvalReport& report, const std::filesystem::path& path) {
  json j{{"version", kSchemaVersion},
         {"mean_reprojection_px", report.mean_reprojection_px},
         {"mean_group_size", report.mean_group_size},
         {"outlier_count", report.outlier_count},
         // C_var is reported in squared scene units
         {"c_var_squared_scene_units", report.c_var}};
  if (report.pa_mpjpe) j["pa_mpjpe"] = *report.pa_mpjpe;
  if (report.clustering_f1) j["clustering_f1"] = *report.clustering_f1;
  write_json(j, path);
}

std::map<std::pair<int, int>, int> load_labels(const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  std::map<std::pair<int, int>, int> labels;
  try {
    for (const auto& l : j.at("labels"))
      labels[{l.at("frame_id").get<int>(), l.at("pose_id").get<int>()}] =
          l.at("person_id").get<int>();
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
  return labels;
}

void save_ground_truth(const GroundTruthScene& scene, const RenderedScene& rendered,
                       const std::filesystem::path& path) {
  json labels = json::array();
  for (const auto& [key, person] : rendered.labels)
    labels.push_back({{"frame_id", key.first},
                      {"pose_id", key.second},
                      {"person_id", person}});
  write_json({{"version", kSchemaVersion},
              {"num_joints", kNumJoints},
              {"skeletons", skeletons_to_json(scene.skeletons)},
              {"labels", labels}},
             path);
}

std::vector<Skeleton3D> load_ground_truth_skeletons(
    const std::filesystem::path& path) {
  json j = read_json(path, kSchemaVersion);
  try {
    return skeletons_from_json(j.at("skeletons"), path.string());
  } catch (const json::exception& e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
}

std::vector<CameraView> import_colmap(const std::filesystem::path& cameras_txt,
                                      const std::filesystem::path& images_txt) {
  struct Intrinsics {
    double fx, fy, cx, cy;
    int width, height;
  };
  std::map<int, Intrinsics> intrinsics;

  std::ifstream cam_in(cameras_txt);
  if (!cam_in)
    throw Error("parse-error", cameras_txt.string() + ": cannot open file");
  std::string line;
  int line_no = 0;
  while (std::getline(cam_in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int camera_id, width, height;
    std::string model;
    if (!(ss >> camera_id >> model >> width >> height))
      throw Error("parse-error", cameras_txt.string() + ":" +
                                     std::to_string(line_no) + ": bad camera line");
    Intrinsics K{0, 0, 0, 0, width, height};
    if (model == "PINHOLE") {
      if (!(ss >> K.fx >> K.fy >> K.cx >> K.cy))
        throw Error("parse-error", cameras_txt.string() + ":" +
                                       std::to_string(line_no) +
                                       ": PINHOLE needs fx fy cx cy");
    } else if (model == "SIMPLE_PINHOLE") {
      double f;
      if (!(ss >> f >> K.cx >> K.cy))
        throw Error("parse-error", cameras_txt.string() + ":" +
                                       std::to_string(line_no) +
                                       ": SIMPLE_PINHOLE needs f cx cy");
      K.fx = K.fy = f;
    } else {
      throw Error("unsupported-model",
                  "camera model " + model + " is not supported (line " +
                      std::to_string(line_no) + ")");
    }
    intrinsics[camera_id] = K;
  }

  std::ifstream img_in(images_txt);
  if (!img_in)
    throw Error("parse-error", images_txt.string() + ": cannot open file");
  std::vector<CameraView> views;
  line_no = 0;
  bool expecting_points = false;
  while (std::getline(img_in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    if (expecting_points) {  // POINTS2D line (possibly empty), ignored
      expecting_points = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ss(line);
    int image_id, camera_id;
    double qw, qx, qy, qz, tx, ty, tz;
    std::string name;
    if (!(ss >> image_id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >> camera_id))
      throw Error("parse-error", images_txt.string() + ":" +
                                     std::to_string(line_no) + ": bad image line");
    ss >> name;
    auto it = intrinsics.find(camera_id);
    if (it == intrinsics.end())
      throw Error("parse-error", images_txt.string() + ":" +
                                     std::to_string(line_no) +
                                     ": unknown camera id " +
                                     std::to_string(camera_id));
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (std::abs(q.norm() - 1.0) > 1e-3)
      std::fprintf(stderr, "warning: non-unit quaternion for image %d, normalizing\n",
                   image_id);
    q.normalize();

    CameraView cam;
    cam.frame_id = image_id;
    cam.fx = it->second.fx;
    cam.fy = it->second.fy;
    cam.cx = it->second.cx;
    cam.cy = it->second.cy;
    cam.width = it->second.width;
    cam.height = it->second.height;
    cam.rotation = q.toRotationMatrix();
    cam.translation = {tx, ty, tz};
    cam.validate();
    views.push_back(cam);
    expecting_points = true;
  }
  return views;
}

void export_colmap(const std::vector<CameraView>& cameras,
                   const std::filesystem::path& cameras_txt,
                   const std::filesystem::path& images_txt) {
  std::ofstream cam_out(cameras_txt);
  std::ofstream img_out(images_txt);
  if (!cam_out || !img_out)
    throw Error("io-error", "cannot open COLMAP output files");
  cam_out << "# Camera list: CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n";
  img_out << "# Image list: IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n";
  cam_out.precision(17);
  img_out.precision(17);
  int camera_id = 1;
  for (const auto& cam : cameras) {
    cam_out << camera_id << " PINHOLE " << cam.width << " " << cam.height << " "
            << cam.fx << " " << cam.fy << " " << cam.cx << " " << cam.cy << "\n";
    Eigen::Quaterniond q(cam.rotation);
    img_out << cam.frame_id << " " << q.w() << " " << q.x() << " " << q.y() << " "
            << q.z() << " " << cam.translation.x() << " " << cam.translation.y()
            << " " << cam.translation.z() << " " << camera_id << " frame_"
            << cam.frame_id << ".png\n";
    img_out << "\n";  // empty POINTS2D line
    ++camera_id;
  }
}

std::map<std::string, std::string> load_key_value(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse-error", path.string() + ": cannot open file");
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      size_t b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("parse-error", path.string() + ":" + std::to_string(line_no) +
                                     ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  auto kv = load_key_value(path);
  SceneSpec spec;
  auto get = [&](const char* key, auto& field) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    std::istringstream ss(it->second);
    if (!(ss >> field))
      throw Error("parse-error",
                  path.string() + ": bad value for " + std::string(key));
    kv.erase(it);
  };
  get("num_people", spec.num_people);
  get("pose_jitter", spec.pose_jitter);
  get("region_min_x", spec.region_min.x());
  get("region_min_y", spec.region_min.y());
  get("region_min_z", spec.region_min.z());
  get("region_max_x", spec.region_max.x());
  get("region_max_y", spec.region_max.y());
  get("region_max_z", spec.region_max.z());
  get("arc_degrees", spec.arc_degrees);
  get("radius", spec.radius);
  get("height", spec.height);
  get("num_frames", spec.num_frames);
  get("image_width", spec.image_width);
  get("image_height", spec.image_height);
  get("focal_px", spec.focal_px);
  get("pixel_sigma", spec.noise.pixel_sigma);
  get("outlier_rate", spec.noise.outlier_rate);
  get("outlier_offset_px", spec.noise.outlier_offset_px);
  get("miss_rate", spec.noise.miss_rate);
  get("descriptor_dim", spec.noise.descriptor_dim);
  get("descriptor_noise", spec.noise.descriptor_noise);
  get("seed", spec.seed);
  if (!kv.empty())
    throw Error("parse-error",
                path.string() + ": unknown key " + kv.begin()->first);
  spec.validate();
  return spec;
}

}  // namespace mvm
