#include "mvm/matching.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace mvm {

namespace {

std::vector<double> weights_in_matrix_order(const std::vector<Pose2D>& poses,
                                            const AffinityMatrix& A) {
  std::vector<double> w(A.size(), 0.0);
  for (const auto& p : poses) {
    auto it = A.index_of.find({p.frame_id, p.pose_id});
    if (it == A.index_of.end())
      throw Error("index-error", "pose missing from affinity matrix index");
    w[it->second] = p.confidence;
  }
  return w;
}

double group_objective(const std::vector<int>& members, const AffinityMatrix& A,
                       const std::vector<double>& w) {
  double sum = 0.0;
  for (size_t a = 0; a < members.size(); ++a)
    for (size_t b = a + 1; b < members.size(); ++b)
      sum += 2.0 * w[members[a]] * w[members[b]] * A.entries(members[a], members[b]);
  return sum;
}

Partition from_index_groups(const std::vector<std::vector<int>>& groups,
                            const std::vector<int>& unassigned,
                            const AffinityMatrix& A, const std::vector<double>& w) {
  Partition p;
  for (const auto& g : groups) {
    PoseGroup pg;
    pg.person_id = static_cast<int>(p.groups.size());
    for (int idx : g) {
      pg.members.push_back(A.key_of[idx]);
      double score = 0.0;
      for (int other : g)
        if (other != idx) score += w[idx] * w[other] * A.entries(idx, other);
      pg.member_scores.push_back(score);
    }
    p.objective += group_objective(g, A, w);
    p.groups.push_back(std::move(pg));
  }
  for (int idx : unassigned) p.unassigned.push_back(A.key_of[idx]);
  return p;
}

}  // namespace

void Partition::validate(const AffinityMatrix& A) const {
  std::set<std::pair<int, int>> seen;
  for (const auto& g : groups) {
    if (g.members.empty()) throw Error("invalid-partition", "empty group");
    std::set<int> frames;
    for (const auto& m : g.members) {
      if (!A.index_of.count(m))
        throw Error("invalid-partition", "member not in affinity index");
      if (!seen.insert(m).second)
        throw Error("invalid-partition", "detection appears in two groups");
      if (!frames.insert(m.first).second)
        throw Error("invalid-partition", "two members share a frame");
    }
  }
  for (const auto& m : unassigned)
    if (!seen.insert(m).second)
      throw Error("invalid-partition", "detection both grouped and unassigned");
  if (seen.size() != static_cast<size_t>(A.size()))
    throw Error("invalid-partition", "partition does not cover all detections");
}

double objective_value(const Partition& partition, const AffinityMatrix& A,
                       const std::vector<Pose2D>& poses) {
  partition.validate(A);
  auto w = weights_in_matrix_order(poses, A);
  double total = 0.0;
  for (const auto& g : partition.groups) {
    std::vector<int> idx;
    for (const auto& m : g.members) idx.push_back(A.index_of.at(m));
    total += group_objective(idx, A, w);
  }
  return total;
}

Partition greedy_match(const std::vector<Pose2D>& poses, const AffinityMatrix& A,
                       const GreedyParams& params) {
  const int P = A.size();
  auto w = weights_in_matrix_order(poses, A);
  std::vector<bool> visited(P, false);

  // Ties broken by ascending (frame_id, pose_id), which is the matrix
  // order of A.key_of only if inputs came sorted; compare keys explicitly.
  auto key_less = [&](int a, int b) { return A.key_of[a] < A.key_of[b]; };

  std::vector<std::vector<int>> groups;
  int num_visited = 0;
  while (num_visited < P) {
    int seed = -1;
    for (int i = 0; i < P; ++i) {
      if (visited[i]) continue;
      if (seed < 0 || w[i] > w[seed] || (w[i] == w[seed] && key_less(i, seed)))
        seed = i;
    }
    if (seed < 0 || w[seed] < params.seed_min_confidence) break;

    std::vector<int> group{seed};
    visited[seed] = true;
    ++num_visited;
    std::set<int> used_frames{A.key_of[seed].first};

    while (true) {
      int best = -1;
      double best_score = -1.0;
      for (int cand = 0; cand < P; ++cand) {
        if (visited[cand] || used_frames.count(A.key_of[cand].first)) continue;
        double score = 0.0;
        for (int m : group) score += w[cand] * w[m] * A.entries(cand, m);
        if (score > best_score ||
            (score == best_score && best >= 0 && key_less(cand, best))) {
          best = cand;
          best_score = score;
        }
      }
      // Mean per-member weighted affinity must clear tau to keep growing.
      if (best < 0 || best_score / static_cast<double>(group.size()) < params.tau)
        break;
      group.push_back(best);
      visited[best] = true;
      ++num_visited;
      used_frames.insert(A.key_of[best].first);
    }
    groups.push_back(std::move(group));
  }

  std::vector<int> unassigned;
  for (int i = 0; i < P; ++i)
    if (!visited[i]) unassigned.push_back(i);
  std::sort(unassigned.begin(), unassigned.end(), key_less);

  Partition p = from_index_groups(groups, unassigned, A, w);
  p.validate(A);
  return p;
}

Partition exhaustive_match(const std::vector<Pose2D>& poses, const AffinityMatrix& A) {
  const int P = A.size();
  if (P > 10)
    throw Error("instance-too-large",
                "exhaustive matcher is limited to 10 detections, got " +
                    std::to_string(P));
  auto w = weights_in_matrix_order(poses, A);

  std::vector<std::vector<int>> current, best;
  double best_objective = -1.0;

  // Canonical enumeration order (detection 0 seeds the first group, each
  // detection joins an existing group or opens the next) visits partitions
  // in lexicographic group-encoding order; keeping only strict improvements
  // makes the tie-break deterministic.
  auto recurse = [&](auto&& self, int next) -> void {
    if (next == P) {
      double obj = 0.0;
      for (const auto& g : current) obj += group_objective(g, A, w);
      if (obj > best_objective) {
        best_objective = obj;
        best = current;
      }
      return;
    }
    int frame = A.key_of[next].first;
    // index loop: the recursive call appends to `current`, which would
    // invalidate range-for references
    const size_t open = current.size();
    for (size_t gi = 0; gi < open; ++gi) {
      bool clash = false;
      for (int m : current[gi])
        if (A.key_of[m].first == frame) { clash = true; break; }
      if (clash) continue;
      current[gi].push_back(next);
      self(self, next + 1);
      current[gi].pop_back();
    }
    current.push_back({next});
    self(self, next + 1);
    current.pop_back();
  };
  if (P > 0) recurse(recurse, 0);

  Partition p = from_index_groups(best, {}, A, w);
  p.validate(A);
  return p;
}

std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost) {
  // Kuhn-Munkres with potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error("invalid-cost", "cost matrix must be square");
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

Partition hungarian_chain_match(const std::vector<Pose2D>& poses,
                                const AffinityMatrix& A) {
  auto w = weights_in_matrix_order(poses, A);
  std::map<int, std::vector<int>> by_frame;
  for (int i = 0; i < A.size(); ++i) by_frame[A.key_of[i].first].push_back(i);
  for (auto& [frame, idx] : by_frame)
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return A.key_of[a] < A.key_of[b]; });

  std::vector<std::vector<int>> groups;
  std::map<int, int> group_of;  // detection index -> group

  auto new_group = [&](int idx) {
    group_of[idx] = static_cast<int>(groups.size());
    groups.push_back({idx});
  };

  bool first = true;
  const std::vector<int>* prev = nullptr;
  for (const auto& [frame, cur] : by_frame) {
    if (first) {
      for (int idx : cur) new_group(idx);
      first = false;
      prev = &cur;
      continue;
    }
    const int n = static_cast<int>(std::max(prev->size(), cur.size()));
    // Pad to square; dummy assignments cost as much as a refused match.
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, 1.0);
    for (size_t r = 0; r < prev->size(); ++r)
      for (size_t c = 0; c < cur.size(); ++c)
        cost(static_cast<int>(r), static_cast<int>(c)) =
            1.0 - A.entries((*prev)[r], cur[c]);
    auto assignment = hungarian_assignment(cost);
    std::vector<bool> matched(cur.size(), false);
    for (size_t r = 0; r < prev->size(); ++r) {
      int c = assignment[static_cast<int>(r)];
      if (c < 0 || c >= static_cast<int>(cur.size())) continue;
      if (A.entries((*prev)[r], cur[c]) <= 0.0) continue;  // refuse A=0 links
      int g = group_of[(*prev)[r]];
      groups[g].push_back(cur[c]);
      group_of[cur[c]] = g;
      matched[c] = true;
    }
    for (size_t c = 0; c < cur.size(); ++c)
      if (!matched[c]) new_group(cur[c]);
    prev = &cur;
  }

  Partition p = from_index_groups(groups, {}, A, w);
  p.validate(A);
  return p;
}

}  // namespace mvm
