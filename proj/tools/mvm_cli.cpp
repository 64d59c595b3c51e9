#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "mvm/pipeline.hpp"
#include "mvm/reconstruction.hpp"

namespace {

using namespace mvm;

int verbosity() {
  const char* env = std::getenv("MVM_LOG");
  return env ? std::atoi(env) : 0;
}

void log(int level, const std::string& msg) {
  if (verbosity() >= level) std::cerr << msg << "\n";
}

int exit_code_for(const Error& e) {
  if (e.code() == "parse-error" || e.code() == "unsupported-model" ||
      e.code() == "invalid-config")
    return 2;
  if (e.code() == "empty-detections") return 3;
  if (e.code() == "invalid-partition" || e.code() == "invariant-breach" ||
      e.code() == "index-error")
    return 4;
  return 1;
}

AffinityMode parse_mode(const std::string& name) {
  if (name == "combined") return AffinityMode::kCombined;
  if (name == "geometric") return AffinityMode::kGeometricOnly;
  if (name == "appearance") return AffinityMode::kAppearanceOnly;
  throw Error("invalid-config", "unknown affinity mode " + name);
}

struct MatchOptions {
  std::string poses, cameras, descriptors, out = "groups.json";
  std::string matcher = "greedy", mode = "combined";
  double gamma = 0.2, tau = 0.05, seed_min_confidence = 0.3;
  int min_common_joints = 4;
};

int run_match(const MatchOptions& opt) {
  auto cameras = load_cameras(opt.cameras);
  auto poses = load_poses(opt.poses);
  if (poses.empty()) throw Error("empty-detections", "no 2D detections to match");
  std::optional<std::map<std::pair<int, int>, AppearanceDescriptor>> descriptors;
  if (!opt.descriptors.empty()) descriptors = load_descriptors(opt.descriptors);

  AffinityParams params;
  params.gamma = opt.gamma;
  params.min_common_joints = opt.min_common_joints;
  params.mode = parse_mode(opt.mode);
  auto A = build_affinity_matrix(poses, cameras,
                                 descriptors ? &*descriptors : nullptr, params);

  Partition partition;
  if (opt.matcher == "greedy")
    partition = greedy_match(poses, A, {opt.tau, opt.seed_min_confidence});
  else if (opt.matcher == "exhaustive")
    partition = exhaustive_match(poses, A);
  else if (opt.matcher == "hungarian")
    partition = hungarian_chain_match(poses, A);
  else
    throw Error("invalid-config", "unknown matcher " + opt.matcher);
  partition.objective = objective_value(partition, A, poses);
  save_groups(partition, opt.out);
  log(1, "wrote " + opt.out + " with " + std::to_string(partition.groups.size()) +
             " groups, objective " + std::to_string(partition.objective));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view matching and 3D human pose reconstruction"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene");
  std::string synth_spec, synth_out = ".";
  std::uint64_t synth_seed = 0;
  bool synth_seed_set = false;
  synth_cmd->add_option("--spec", synth_spec, "Scene spec (key = value file)");
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--seed", synth_seed, "Override the scene seed")
      ->each([&](const std::string&) { synth_seed_set = true; });

  // match
  auto* match_cmd = app.add_subcommand("match", "Partition detections into people");
  MatchOptions match_opt;
  match_cmd->add_option("--poses", match_opt.poses)->required();
  match_cmd->add_option("--cameras", match_opt.cameras)->required();
  match_cmd->add_option("--descriptors", match_opt.descriptors);
  match_cmd->add_option("--out", match_opt.out);
  match_cmd->add_option("--matcher", match_opt.matcher,
                        "greedy | exhaustive | hungarian");
  match_cmd->add_option("--mode", match_opt.mode,
                        "combined | geometric | appearance");
  match_cmd->add_option("--gamma", match_opt.gamma);
  match_cmd->add_option("--tau", match_opt.tau);
  match_cmd->add_option("--seed-min-confidence", match_opt.seed_min_confidence);
  match_cmd->add_option("--min-common-joints", match_opt.min_common_joints);

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "Triangulate matched groups");
  std::string rec_poses, rec_cameras, rec_groups, rec_out = "skeletons.json";
  RansacParams rec_ransac;
  double rec_min_parallax_deg = 1.0;
  std::uint64_t rec_seed = 0;
  rec_cmd->add_option("--poses", rec_poses)->required();
  rec_cmd->add_option("--cameras", rec_cameras)->required();
  rec_cmd->add_option("--groups", rec_groups)->required();
  rec_cmd->add_option("--out", rec_out);
  rec_cmd->add_option("--ransac-iterations", rec_ransac.iterations);
  rec_cmd->add_option("--inlier-threshold", rec_ransac.inlier_threshold_px);
  rec_cmd->add_option("--min-inliers", rec_ransac.min_inliers);
  rec_cmd->add_option("--min-parallax-deg", rec_min_parallax_deg);
  rec_cmd->add_option("--seed", rec_seed);

  // refine
  auto* ref_cmd = app.add_subcommand("refine", "Bundle-adjust skeletons");
  std::string ref_poses, ref_cameras, ref_groups, ref_skeletons, ref_gmm;
  std::string ref_out = "refined.json";
  double ref_lambda = 1.0, ref_delta = 10.0;
  ref_cmd->add_option("--poses", ref_poses)->required();
  ref_cmd->add_option("--cameras", ref_cameras)->required();
  ref_cmd->add_option("--groups", ref_groups)->required();
  ref_cmd->add_option("--skeletons", ref_skeletons)->required();
  ref_cmd->add_option("--gmm", ref_gmm);
  ref_cmd->add_option("--out", ref_out);
  ref_cmd->add_option("--lambda", ref_lambda);
  ref_cmd->add_option("--robust-delta", ref_delta);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate skeletons");
  std::string ev_poses, ev_cameras, ev_groups, ev_skeletons, ev_gt;
  std::string ev_out = "eval_report.json", ev_format = "table";
  double ev_cvar_tau = 0.5;
  eval_cmd->add_option("--poses", ev_poses)->required();
  eval_cmd->add_option("--cameras", ev_cameras)->required();
  eval_cmd->add_option("--groups", ev_groups)->required();
  eval_cmd->add_option("--skeletons", ev_skeletons)->required();
  eval_cmd->add_option("--ground-truth", ev_gt);
  eval_cmd->add_option("--out", ev_out);
  eval_cmd->add_option("--c-var-tau", ev_cvar_tau);
  eval_cmd->add_option("--format", ev_format, "table | json");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run the full pipeline");
  std::string pipe_config;
  PipelineConfig overrides;
  std::vector<std::string> pipe_set;
  pipe_cmd->add_option("--config", pipe_config, "Pipeline config file")->required();
  pipe_cmd->add_option("--gamma", overrides.gamma);
  pipe_cmd->add_option("--tau", overrides.tau);
  pipe_cmd->add_option("--lambda", overrides.lambda);
  pipe_cmd->add_option("--seed", overrides.seed);
  pipe_cmd->add_option("--out", overrides.out);

  // fit-gmm
  auto* fit_cmd = app.add_subcommand("fit-gmm", "Fit the pose prior mixture");
  std::string fit_corpus, fit_out = "gmm.json";
  int fit_L = 8;
  std::uint64_t fit_seed = 0;
  fit_cmd->add_option("--corpus", fit_corpus,
                      "skeletons.json-style file of full poses")->required();
  fit_cmd->add_option("--components", fit_L);
  fit_cmd->add_option("--seed", fit_seed);
  fit_cmd->add_option("--out", fit_out);

  // import-colmap
  auto* colmap_cmd = app.add_subcommand("import-colmap", "Import a COLMAP model");
  std::string cm_cameras, cm_images, cm_out = "cameras.json";
  colmap_cmd->add_option("--cameras-txt", cm_cameras)->required();
  colmap_cmd->add_option("--images-txt", cm_images)->required();
  colmap_cmd->add_option("--out", cm_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      SceneSpec spec = synth_spec.empty() ? SceneSpec{} : load_scene_spec(synth_spec);
      if (synth_seed_set) spec.seed = synth_seed;
      auto scene = sample_scene(spec);
      auto rendered = render_observations(scene, spec);
      std::filesystem::path out(synth_out);
      std::filesystem::create_directories(out);
      save_cameras(scene.cameras, out / "cameras.json");
      save_poses(rendered.poses, out / "poses2d.json");
      save_descriptors(rendered.descriptors, out / "descriptors.json");
      save_ground_truth(scene, rendered, out / "ground_truth.json");
      log(1, "wrote scene with " + std::to_string(rendered.poses.size()) +
                 " detections to " + synth_out);
    } else if (match_cmd->parsed()) {
      return run_match(match_opt);
    } else if (rec_cmd->parsed()) {
      auto cameras = load_cameras(rec_cameras);
      auto poses = load_poses(rec_poses);
      if (poses.empty()) throw Error("empty-detections", "no 2D detections");
      auto partition = load_groups(rec_groups);
      rec_ransac.min_parallax_rad = rec_min_parallax_deg * M_PI / 180.0;
      ReconstructionParams params{rec_ransac, rec_seed};
      std::vector<Skeleton3D> skeletons;
      for (const auto& group : partition.groups) {
        if (group.members.size() < 2) continue;
        skeletons.push_back(reconstruct_group(group, poses, cameras, params));
      }
      save_skeletons(skeletons, rec_out);
      log(1, "reconstructed " + std::to_string(skeletons.size()) + " skeletons");
    } else if (ref_cmd->parsed()) {
      auto cameras = load_cameras(ref_cameras);
      auto poses = load_poses(ref_poses);
      auto partition = load_groups(ref_groups);
      auto skeletons = load_skeletons(ref_skeletons);
      std::optional<GmmPrior> gmm;
      if (!ref_gmm.empty()) gmm = load_gmm(ref_gmm);
      BundleAdjustParams params;
      params.lambda = ref_lambda;
      params.robust_delta_px = ref_delta;
      std::map<int, const PoseGroup*> group_of;
      for (const auto& g : partition.groups) group_of[g.person_id] = &g;
      for (auto& s : skeletons) {
        auto it = group_of.find(s.person_id);
        if (it == group_of.end() || s.num_valid() == 0) continue;
        s = bundle_adjust(s, *it->second, poses, cameras,
                          gmm ? &*gmm : nullptr, params);
      }
      save_skeletons(skeletons, ref_out);
      log(1, "refined " + std::to_string(skeletons.size()) + " skeletons");
    } else if (eval_cmd->parsed()) {
      auto cameras = load_cameras(ev_cameras);
      auto poses = load_poses(ev_poses);
      auto partition = load_groups(ev_groups);
      auto skeletons = load_skeletons(ev_skeletons);
      std::map<std::pair<int, int>, const Pose2D*> pose_of;
      for (const auto& p : poses) pose_of[{p.frame_id, p.pose_id}] = &p;
      std::map<int, const PoseGroup*> group_of;
      for (const auto& g : partition.groups) group_of[g.person_id] = &g;

      EvalReport report;
      double er_sum = 0.0, cvar_sum = 0.0, size_sum = 0.0;
      int er_n = 0, cvar_n = 0, size_n = 0;
      for (const auto& s : skeletons) {
        auto it = group_of.find(s.person_id);
        if (it == group_of.end()) continue;
        size_sum += static_cast<double>(it->second->members.size());
        ++size_n;
        try {
          er_sum += reprojection_error_px(s, *it->second, poses, cameras);
          ++er_n;
        } catch (const Error&) {
        }
        std::vector<Pose2D> detections;
        for (const auto& key : it->second->members)
          detections.push_back(*pose_of.at(key));
        try {
          cvar_sum += c_var(detections, cameras, ev_cvar_tau);
          ++cvar_n;
        } catch (const Error&) {
        }
      }
      report.mean_reprojection_px = er_n > 0 ? er_sum / er_n : 0.0;
      report.mean_group_size = size_n > 0 ? size_sum / size_n : 0.0;
      report.c_var = cvar_n > 0 ? cvar_sum / cvar_n : 0.0;
      if (!ev_gt.empty()) {
        auto labels = load_labels(ev_gt);
        auto gt = load_ground_truth_skeletons(ev_gt);
        report.clustering_f1 = clustering_f1(partition, labels);
        double sum = 0.0;
        int n = 0;
        for (const auto& s : skeletons) {
          auto it = group_of.find(s.person_id);
          if (it == group_of.end() || s.num_valid() < 7) continue;
          std::map<int, int> votes;
          for (const auto& key : it->second->members) {
            auto lit = labels.find(key);
            if (lit != labels.end()) ++votes[lit->second];
          }
          if (votes.empty()) continue;
          int person = std::max_element(votes.begin(), votes.end(),
                                        [](auto& a, auto& b) {
                                          return a.second < b.second;
                                        })->first;
          if (person < 0 || person >= static_cast<int>(gt.size())) continue;
          try {
            sum += pa_mpjpe(s, gt[person]);
            ++n;
          } catch (const Error&) {
          }
        }
        if (n > 0) report.pa_mpjpe = sum / n;
      }
      save_eval_report(report, ev_out);
      if (ev_format == "table") {
        std::cout << "mean_reprojection_px            " << report.mean_reprojection_px
                  << "\nmean_group_size                 " << report.mean_group_size
                  << "\nc_var (squared scene units)     " << report.c_var << "\n";
        if (report.pa_mpjpe)
          std::cout << "pa_mpjpe (scene units)          " << *report.pa_mpjpe << "\n";
        if (report.clustering_f1)
          std::cout << "clustering_f1                   " << *report.clustering_f1
                    << "\n";
      } else {
        std::ifstream in(ev_out);
        std::cout << in.rdbuf();
      }
    } else if (pipe_cmd->parsed()) {
      PipelineConfig config = load_pipeline_config(pipe_config);
      for (const auto* opt :
           {pipe_cmd->get_option("--gamma"), pipe_cmd->get_option("--tau"),
            pipe_cmd->get_option("--lambda"), pipe_cmd->get_option("--seed"),
            pipe_cmd->get_option("--out")}) {
        if (opt->count() == 0) continue;
        const std::string& name = opt->get_name();
        if (name == "--gamma") config.gamma = overrides.gamma;
        if (name == "--tau") config.tau = overrides.tau;
        if (name == "--lambda") config.lambda = overrides.lambda;
        if (name == "--seed") config.seed = overrides.seed;
        if (name == "--out") config.out = overrides.out;
      }
      auto result = run_pipeline(config);
      std::cout << "groups " << result.partition.groups.size() << ", skeletons "
                << result.skeletons.size() << ", mean E_R "
                << result.report.mean_reprojection_px << " px";
      if (result.report.clustering_f1)
        std::cout << ", clustering F1 " << *result.report.clustering_f1;
      std::cout << "\n";
    } else if (fit_cmd->parsed()) {
      auto skeletons = load_skeletons(fit_corpus);
      PoseNormalization norm;
      std::vector<Eigen::VectorXd> corpus;
      for (const auto& s : skeletons) {
        if (s.num_valid() != kNumJoints) continue;  // corpus needs full poses
        Eigen::VectorXd x(3 * kNumJoints);
        for (int c = 0; c < kNumJoints; ++c)
          x.segment<3>(3 * c) = s.joints[c]->position;
        corpus.push_back(normalize_pose(x, norm).y);
      }
      auto gmm = fit_gmm(corpus, fit_L, fit_seed, norm);
      save_gmm(gmm, fit_out);
      log(1, "fit " + std::to_string(fit_L) + " components on " +
                 std::to_string(corpus.size()) + " poses");
    } else if (colmap_cmd->parsed()) {
      auto cameras = import_colmap(cm_cameras, cm_images);
      save_cameras(cameras, cm_out);
      log(1, "imported " + std::to_string(cameras.size()) + " views");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
