#pragma once

#include <filesystem>
#include <string>

#include "mvm/affinity.hpp"
#include "mvm/matching.hpp"
#include "mvm/metrics.hpp"
#include "mvm/refinement.hpp"
#include "mvm/skeleton.hpp"
#include "mvm/synth.hpp"

namespace mvm {

// All artifacts carry schema version "mvm/1".
inline constexpr const char* kSchemaVersion = "mvm/1";

// Parse failures throw Error("parse-error", ...) naming the file (and the
// line for text formats).

std::vector<CameraView> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::vector<CameraView>& cameras,
                  const std::filesystem::path& path);

std::vector<Pose2D> load_poses(const std::filesystem::path& path);
void save_poses(const std::vector<Pose2D>& poses,
                const std::filesystem::path& path);

std::map<std::pair<int, int>, AppearanceDescriptor> load_descriptors(
    const std::filesystem::path& path);
void save_descriptors(
    const std::map<std::pair<int, int>, AppearanceDescriptor>& descriptors,
    const std::filesystem::path& path);

Partition load_groups(const std::filesystem::path& path);
void save_groups(const Partition& partition, const std::filesystem::path& path);

std::vector<Skeleton3D> load_skeletons(const std::filesystem::path& path);
void save_skeletons(const std::vector<Skeleton3D>& skeletons,
                    const std::filesystem::path& path);

GmmPrior load_gmm(const std::filesystem::path& path);
void save_gmm(const GmmPrior& gmm, const std::filesystem::path& path);

BoneTable load_bones(const std::filesystem::path& path);
void save_bones(const BoneTable& bones, const std::filesystem::path& path);

void save_eval_report(const EvalReport& report, const std::filesystem::path& path);

std::map<std::pair<int, int>, int> load_labels(const std::filesystem::path& path);
void save_ground_truth(const GroundTruthScene& scene, const RenderedScene& rendered,
                       const std::filesystem::path& path);
std::vector<Skeleton3D> load_ground_truth_skeletons(
    const std::filesystem::path& path);

// COLMAP text model import (PINHOLE / SIMPLE_PINHOLE only).
std::vector<CameraView> import_colmap(const std::filesystem::path& cameras_txt,
                                      const std::filesystem::path& images_txt);
void export_colmap(const std::vector<CameraView>& cameras,
                   const std::filesystem::path& cameras_txt,
                   const std::filesystem::path& images_txt);

// Scene spec in "key = value" text form.
SceneSpec load_scene_spec(const std::filesystem::path& path);

// "key = value" text file; '#' starts a comment, blank lines skipped.
std::map<std::string, std::string> load_key_value(
    const std::filesystem::path& path);

}  // namespace mvm
