#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mvm/matching.hpp"
#include "test_helpers.hpp"

using namespace mvm;
using mvm::testing::arc_cameras;
using mvm::testing::person_at;
using mvm::testing::project_pose;

namespace {

struct Instance {
  std::vector<Pose2D> poses;
  AffinityMatrix A;
};

// Hand-built instance: keys in matrix order, symmetric entries, optional
// per-detection confidences (default 1).
Instance make_instance(const std::vector<std::pair<int, int>>& keys,
                       const Eigen::MatrixXd& entries,
                       const std::vector<double>& confidences = {}) {
  Instance inst;
  inst.A.entries = entries;
  const int P = static_cast<int>(keys.size());
  inst.A.same_frame.resize(P, P);
  inst.A.same_frame.setConstant(false);
  for (int i = 0; i < P; ++i) {
    inst.A.index_of[keys[i]] = i;
    inst.A.key_of.push_back(keys[i]);
    Pose2D p;
    p.frame_id = keys[i].first;
    p.pose_id = keys[i].second;
    p.confidence = confidences.empty() ? 1.0 : confidences[i];
    inst.poses.push_back(p);
    for (int j = 0; j < P; ++j)
      if (i != j && keys[i].first == keys[j].first)
        inst.A.same_frame(i, j) = true;
  }
  return inst;
}

// Two people seen in `frames` frames; within-person affinity `hi`, cross `lo`.
Instance two_person_instance(int frames, double hi, double lo) {
  std::vector<std::pair<int, int>> keys;
  for (int f = 0; f < frames; ++f)
    for (int p = 0; p < 2; ++p) keys.push_back({f, p});
  const int P = static_cast<int>(keys.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j) {
      if (i == j || keys[i].first == keys[j].first) continue;
      A(i, j) = keys[i].second == keys[j].second ? hi : lo;
    }
  return make_instance(keys, A);
}

std::set<std::set<std::pair<int, int>>> group_sets(const Partition& p) {
  std::set<std::set<std::pair<int, int>>> out;
  for (const auto& g : p.groups)
    out.insert(std::set<std::pair<int, int>>(g.members.begin(), g.members.end()));
  return out;
}

// Independent exact maximizer: enumerate every label vector in base P,
// keep frame-consistent ones, evaluate through objective_value.
double brute_force_objective(const Instance& inst) {
  const int P = inst.A.size();
  REQUIRE(P <= 8);
  double best = 0.0;
  std::vector<int> label(P, 0);
  std::uint64_t total = 1;
  for (int i = 0; i < P; ++i) total *= P;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int i = 0; i < P; ++i) {
      label[i] = static_cast<int>(c % P);
      c /= P;
    }
    std::map<int, std::vector<int>> by_label;
    for (int i = 0; i < P; ++i) by_label[label[i]].push_back(i);
    bool ok = true;
    Partition part;
    for (const auto& [l, members] : by_label) {
      std::set<int> frames;
      PoseGroup g;
      for (int m : members) {
        if (!frames.insert(inst.A.key_of[m].first).second) { ok = false; break; }
        g.members.push_back(inst.A.key_of[m]);
      }
      if (!ok) break;
      part.groups.push_back(std::move(g));
    }
    if (!ok) continue;
    best = std::max(best, objective_value(part, inst.A, inst.poses));
  }
  return best;
}

}  // namespace

TEST_CASE("objective: one pair counted twice, singletons contribute zero") {
  auto inst = make_instance({{0, 0}, {1, 0}},
                            (Eigen::MatrixXd(2, 2) << 0, 0.8, 0.8, 0).finished());
  Partition joined;
  joined.groups.push_back({0, {{0, 0}, {1, 0}}, {}});
  CHECK(objective_value(joined, inst.A, inst.poses) == doctest::Approx(1.6));

  Partition split;
  split.groups.push_back({0, {{0, 0}}, {}});
  split.groups.push_back({1, {{1, 0}}, {}});
  CHECK(objective_value(split, inst.A, inst.poses) == doctest::Approx(0.0));
}

TEST_CASE("objective: confidence weights multiply into each pair") {
  auto inst = make_instance({{0, 0}, {1, 0}, {2, 0}},
                            (Eigen::MatrixXd(3, 3) << 0, 0.5, 0.4,
                                                      0.5, 0, 0.9,
                                                      0.4, 0.9, 0).finished(),
                            {1.0, 0.5, 0.8});
  Partition all;
  all.groups.push_back({0, {{0, 0}, {1, 0}, {2, 0}}, {}});
  double expect = 2.0 * (1.0 * 0.5 * 0.5 + 1.0 * 0.8 * 0.4 + 0.5 * 0.8 * 0.9);
  CHECK(objective_value(all, inst.A, inst.poses) == doctest::Approx(expect));
}

TEST_CASE("objective: invalid partitions are rejected") {
  auto inst = make_instance({{0, 0}, {0, 1}},
                            Eigen::MatrixXd::Zero(2, 2));
  Partition same_frame;
  same_frame.groups.push_back({0, {{0, 0}, {0, 1}}, {}});
  CHECK_THROWS_AS(objective_value(same_frame, inst.A, inst.poses), Error);

  Partition missing;
  missing.groups.push_back({0, {{0, 0}}, {}});
  CHECK_THROWS_AS(objective_value(missing, inst.A, inst.poses), Error);
}

TEST_CASE("greedy: block-diagonal affinity recovers both people") {
  auto inst = two_person_instance(3, 0.9, 0.05);
  Partition p = greedy_match(inst.poses, inst.A, {});
  REQUIRE(p.groups.size() == 2);
  CHECK(p.unassigned.empty());
  std::set<std::set<std::pair<int, int>>> expect{
      {{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 1}, {2, 1}}};
  CHECK(group_sets(p) == expect);
  CHECK(p.objective ==
        doctest::Approx(objective_value(p, inst.A, inst.poses)));
}

TEST_CASE("greedy: tau above every affinity yields singleton groups") {
  auto inst = two_person_instance(3, 0.9, 0.05);
  GreedyParams params;
  params.tau = 10.0;
  Partition p = greedy_match(inst.poses, inst.A, params);
  CHECK(p.groups.size() == 6);
  for (const auto& g : p.groups) CHECK(g.members.size() == 1);
  CHECK(p.objective == doctest::Approx(0.0));
}

TEST_CASE("greedy: low-confidence detections stay unassigned") {
  auto inst = make_instance({{0, 0}, {1, 0}},
                            (Eigen::MatrixXd(2, 2) << 0, 0.9, 0.9, 0).finished(),
                            {0.2, 0.25});
  Partition p = greedy_match(inst.poses, inst.A, {});  // seed_min_confidence 0.3
  CHECK(p.groups.empty());
  CHECK(p.unassigned.size() == 2);
}

TEST_CASE("greedy: deterministic tie-break picks the earliest key") {
  // symmetric instance: both cross-frame links identical
  auto inst = make_instance({{0, 0}, {0, 1}, {1, 0}},
                            (Eigen::MatrixXd(3, 3) << 0, 0, 0.5,
                                                      0, 0, 0.5,
                                                      0.5, 0.5, 0).finished());
  Partition p = greedy_match(inst.poses, inst.A, {});
  REQUIRE(!p.groups.empty());
  // seed ties on confidence resolve to (0,0); it then absorbs (1,0)
  std::set<std::pair<int, int>> first(p.groups[0].members.begin(),
                                      p.groups[0].members.end());
  CHECK(first == std::set<std::pair<int, int>>{{0, 0}, {1, 0}});
}

TEST_CASE("exhaustive: agrees with an independent label enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<int, int>> keys{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}};
    const int P = static_cast<int>(keys.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
    for (int i = 0; i < P; ++i)
      for (int j = i + 1; j < P; ++j)
        if (keys[i].first != keys[j].first) A(i, j) = A(j, i) = u(rng);
    auto inst = make_instance(keys, A);
    Partition p = exhaustive_match(inst.poses, inst.A);
    CHECK(p.objective == doctest::Approx(brute_force_objective(inst)));
    CHECK(p.objective ==
          doctest::Approx(objective_value(p, inst.A, inst.poses)));
  }
}

TEST_CASE("exhaustive: refuses more than 10 detections") {
  std::vector<std::pair<int, int>> keys;
  for (int f = 0; f < 11; ++f) keys.push_back({f, 0});
  auto inst = make_instance(keys, Eigen::MatrixXd::Zero(11, 11));
  try {
    exhaustive_match(inst.poses, inst.A);
    FAIL("expected instance-too-large");
  } catch (const Error& e) {
    CHECK(e.code() == "instance-too-large");
  }
}

TEST_CASE("greedy matches the exact optimum on well-separated instances") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> hi(0.7, 1.0);
  std::uniform_real_distribution<double> lo(0.0, 0.1);
  for (int trial = 0; trial < 100; ++trial) {
    // 3 frames x 2 people with noisy block structure
    std::vector<std::pair<int, int>> keys;
    for (int f = 0; f < 3; ++f)
      for (int p = 0; p < 2; ++p) keys.push_back({f, p});
    const int P = static_cast<int>(keys.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
    for (int i = 0; i < P; ++i)
      for (int j = i + 1; j < P; ++j) {
        if (keys[i].first == keys[j].first) continue;
        A(i, j) = A(j, i) = keys[i].second == keys[j].second ? hi(rng) : lo(rng);
      }
    auto inst = make_instance(keys, A);
    Partition greedy = greedy_match(inst.poses, inst.A, {});
    Partition exact = exhaustive_match(inst.poses, inst.A);
    CHECK(greedy.objective == doctest::Approx(exact.objective));
  }
}

TEST_CASE("greedy: invariant to the order detections are listed") {
  auto base = two_person_instance(4, 0.8, 0.1);
  // perturb affinities so no ties hide ordering bugs
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> eps(-0.05, 0.05);
  for (int i = 0; i < base.A.size(); ++i)
    for (int j = i + 1; j < base.A.size(); ++j)
      if (base.A.entries(i, j) > 0.0) {
        double v = base.A.entries(i, j) + eps(rng);
        base.A.entries(i, j) = base.A.entries(j, i) = v;
      }
  Partition reference = greedy_match(base.poses, base.A, {});

  // rebuild the same instance with the keys inserted in reverse
  std::vector<std::pair<int, int>> rev_keys(base.A.key_of.rbegin(),
                                            base.A.key_of.rend());
  const int P = base.A.size();
  Eigen::MatrixXd rev = Eigen::MatrixXd::Zero(P, P);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      rev(i, j) = base.A.entries(P - 1 - i, P - 1 - j);
  auto shuffled = make_instance(rev_keys, rev);
  Partition permuted = greedy_match(shuffled.poses, shuffled.A, {});
  CHECK(group_sets(reference) == group_sets(permuted));
  CHECK(reference.objective == doctest::Approx(permuted.objective));
}

TEST_CASE("greedy: raising tau never merges more") {
  auto inst = two_person_instance(4, 0.6, 0.2);
  size_t prev_groups = 0;
  for (double tau : {0.01, 0.2, 0.5, 1.0, 5.0}) {
    GreedyParams params;
    params.tau = tau;
    Partition p = greedy_match(inst.poses, inst.A, params);
    CHECK(p.groups.size() + p.unassigned.size() >= prev_groups);
    prev_groups = p.groups.size() + p.unassigned.size();
  }
}

TEST_CASE("hungarian assignment: 2x2 and brute-force permutation oracle") {
  Eigen::MatrixXd c(2, 2);
  c << 1, 2, 2, 1;
  auto a = hungarian_assignment(c);
  CHECK(a == std::vector<int>{0, 1});

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4;
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = u(rng);
    auto assign = hungarian_assignment(cost);
    double got = 0.0;
    std::set<int> cols;
    for (int i = 0; i < n; ++i) {
      got += cost(i, assign[i]);
      cols.insert(assign[i]);
    }
    CHECK(cols.size() == static_cast<size_t>(n));  // a permutation
    std::vector<int> perm{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += cost(i, perm[i]);
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best));
  }
}

TEST_CASE("hungarian chain: clean two-person scene tracks both") {
  auto inst = two_person_instance(4, 0.9, 0.05);
  Partition p = hungarian_chain_match(inst.poses, inst.A);
  REQUIRE(p.groups.size() == 2);
  std::set<std::set<std::pair<int, int>>> expect{
      {{0, 0}, {1, 0}, {2, 0}, {3, 0}}, {{0, 1}, {1, 1}, {2, 1}, {3, 1}}};
  CHECK(group_sets(p) == expect);
}

TEST_CASE("hungarian chain fragments across a dropout; greedy bridges it") {
  // one person, three frames, missing in frame 1
  auto inst = make_instance({{0, 0}, {2, 0}},
                            (Eigen::MatrixXd(2, 2) << 0, 0.9, 0.9, 0).finished());
  // chain only links consecutive frames present in the data; frames 0 and 2
  // are adjacent here, so inject an empty middle frame via a decoy person
  // visible only in frame 1 with zero affinity to everyone.
  auto with_decoy = make_instance(
      {{0, 0}, {1, 5}, {2, 0}},
      (Eigen::MatrixXd(3, 3) << 0, 0, 0.9, 0, 0, 0, 0.9, 0, 0).finished());
  Partition chain = hungarian_chain_match(with_decoy.poses, with_decoy.A);
  CHECK(chain.groups.size() == 3);  // zero-affinity links refused -> fragments

  Partition greedy = greedy_match(with_decoy.poses, with_decoy.A, {});
  bool bridged = false;
  for (const auto& g : greedy.groups)
    bridged |= std::set<std::pair<int, int>>(g.members.begin(), g.members.end()) ==
               std::set<std::pair<int, int>>{{0, 0}, {2, 0}};
  CHECK(bridged);
  CHECK(objective_value(greedy, with_decoy.A, with_decoy.poses) >
        objective_value(chain, with_decoy.A, with_decoy.poses));
}

TEST_CASE("hungarian chain: single frame yields one group per detection") {
  auto inst = make_instance({{0, 0}, {0, 1}, {0, 2}},
                            Eigen::MatrixXd::Zero(3, 3));
  Partition p = hungarian_chain_match(inst.poses, inst.A);
  CHECK(p.groups.size() == 3);
}

TEST_CASE("end to end: affinities from projected people drive the matcher") {
  auto cams = arc_cameras(3, 40.0, 6.0, {0, 0, 1});
  auto a = person_at({-0.9, 0, 0});
  auto b = person_at({0.9, 0, 0});
  std::vector<Pose2D> poses;
  for (const auto& cam : cams) {
    poses.push_back(project_pose(a, cam, 0));
    poses.push_back(project_pose(b, cam, 1));
  }
  auto A = build_affinity_matrix(poses, cams, nullptr, {});
  Partition p = greedy_match(poses, A, {});
  REQUIRE(p.groups.size() == 2);
  for (const auto& g : p.groups) {
    REQUIRE(g.members.size() == 3);
    int person = g.members.front().second;
    for (const auto& m : g.members) CHECK(m.second == person);
  }
}
