// Copyright 2026 The consmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "consmatch/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "consmatch/error.hpp"

namespace consmatch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Optimal matching of labels (columns of the cost) to features (rows) with
// the dual potentials that certify it. Reduced costs
// cost(f, l) - label_potential[l] - feature_potential[f] are nonnegative,
// zero on matched pairs, and feature_potential is zero on unmatched rows.
struct DualSolution {
  std::vector<int> label_to_feature;
  std::vector<int> feature_to_label;  // -1 when unmatched
  std::vector<double> label_potential;
  std::vector<double> feature_potential;
};

// Shortest augmenting path Hungarian method, one label at a time. Labels
// play the role of the smaller side, so no padding of the rectangular cost
// is needed.
DualSolution Hungarian(const Eigen::MatrixXd& cost) {
  const int p = static_cast<int>(cost.rows());
  const int k = static_cast<int>(cost.cols());
  // 1-based; index 0 is the virtual root of each search.
  std::vector<double> u(k + 1, 0.0), v(p + 1, 0.0), min_slack(p + 1);
  std::vector<int> owner(p + 1, 0), way(p + 1, 0);
  std::vector<char> used(p + 1);
  for (int label = 1; label <= k; ++label) {
    owner[0] = label;
    int j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= p; ++j) {
        if (used[j]) continue;
        const double slack = cost(j - 1, i0 - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= p; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution s;
  s.label_to_feature.assign(k, -1);
  s.feature_to_label.assign(p, -1);
  s.label_potential.assign(u.begin() + 1, u.end());
  s.feature_potential.assign(v.begin() + 1, v.end());
  for (int j = 1; j <= p; ++j) {
    if (owner[j] != 0) {
      s.label_to_feature[owner[j] - 1] = j - 1;
      s.feature_to_label[j - 1] = owner[j] - 1;
    }
  }
  return s;
}

double ColumnOrderCost(const Eigen::MatrixXd& cost,
                       const std::vector<int>& column_to_row) {
  double total = 0.0;
  for (size_t c = 0; c < column_to_row.size(); ++c) {
    total += cost(column_to_row[c], static_cast<Eigen::Index>(c));
  }
  return total;
}

// Every optimal assignment is a matching on the tight edges of the dual
// solution that leaves only zero-potential features unmatched. Walking the
// labels in order and fixing each to its smallest feasible feature yields
// the lexicographically smallest optimum. Unmatched features are modeled as
// held by dummy labels that may move to any zero-potential feature.
class TieBreaker {
 public:
  TieBreaker(const Eigen::MatrixXd& cost, DualSolution& dual)
      : cost_(cost),
        dual_(dual),
        p_(static_cast<int>(cost.rows())),
        k_(static_cast<int>(cost.cols())),
        fixed_(k_, 0),
        came_from_(p_, -1) {
    double scale = 1.0;
    if (cost.size() > 0) scale = std::max(scale, cost.cwiseAbs().maxCoeff());
    tolerance_ = 1e-11 * scale;
  }

  void Run() {
    for (int label = 0; label < k_; ++label) {
      for (int feature = 0; feature < p_; ++feature) {
        if (!Tight(label, feature)) continue;
        if (dual_.label_to_feature[label] == feature || Reassign(label, feature)) {
          break;
        }
      }
      fixed_[label] = 1;
    }
  }

 private:
  bool Tight(int label, int feature) const {
    const double reduced = label < k_
                               ? cost_(feature, label) -
                                     dual_.label_potential[label] -
                                     dual_.feature_potential[feature]
                               : -dual_.feature_potential[feature];
    return reduced <= tolerance_;
  }

  // Labels >= k_ denote the dummy holding feature (label - k_).
  int Holder(int feature) const {
    const int owner = dual_.feature_to_label[feature];
    return owner >= 0 ? owner : k_ + feature;
  }

  int Current(int label) const {
    return label < k_ ? dual_.label_to_feature[label] : label - k_;
  }

  void Assign(int label, int feature) {
    if (label < k_) {
      dual_.label_to_feature[label] = feature;
      dual_.feature_to_label[feature] = label;
    } else {
      dual_.feature_to_label[feature] = -1;
    }
  }

  // Moves `label` onto `target` if an alternating path lets the current
  // holder of `target` find another tight feature, ending at the feature
  // `label` gives up.
  bool Reassign(int label, int target) {
    const int released = dual_.label_to_feature[label];
    const int start = Holder(target);
    if (start < k_ && fixed_[start]) return false;

    std::fill(came_from_.begin(), came_from_.end(), -1);
    std::deque<int> queue{start};
    bool found = false;
    while (!queue.empty() && !found) {
      const int current = queue.front();
      queue.pop_front();
      for (int g = 0; g < p_; ++g) {
        if (g == target || came_from_[g] != -1 || !Tight(current, g)) continue;
        came_from_[g] = current;
        if (g == released) {
          found = true;
          break;
        }
        const int next = Holder(g);
        if (next < k_ && (fixed_[next] || next == label)) continue;
        queue.push_back(next);
      }
    }
    if (!found) return false;

    int feature = released;
    while (true) {
      const int mover = came_from_[feature];
      const int previous = Current(mover);
      Assign(mover, feature);
      if (mover == start) break;
      feature = previous;
    }
    Assign(label, target);
    return true;
  }

  const Eigen::MatrixXd& cost_;
  DualSolution& dual_;
  int p_;
  int k_;
  double tolerance_ = 0.0;
  std::vector<char> fixed_;
  std::vector<int> came_from_;
};

}  // namespace

AssignmentResult solve_lap(const Eigen::MatrixXd& cost) {
  const Eigen::Index p = cost.rows();
  const Eigen::Index k = cost.cols();
  if (p < k) {
    throw Error(ErrorCode::kInfeasible,
                "assignment needs at least as many rows as columns, got " +
                    std::to_string(p) + "x" + std::to_string(k));
  }
  if (!cost.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "assignment cost has non-finite entries");
  }
  AssignmentResult result;
  if (k == 0) return result;

  DualSolution dual = Hungarian(cost);
  const std::vector<int> hungarian = dual.label_to_feature;
  const double hungarian_cost = ColumnOrderCost(cost, hungarian);

  TieBreaker(cost, dual).Run();
  result.column_to_row = std::move(dual.label_to_feature);
  result.total_cost = ColumnOrderCost(cost, result.column_to_row);
  // Tightness is judged with a tolerance; never trade optimality for order.
  if (result.total_cost > hungarian_cost) {
    result.column_to_row = hungarian;
    result.total_cost = hungarian_cost;
  }
  return result;
}

Eigen::MatrixXd to_partial_permutation(std::span<const int> column_to_row,
                                       int rows) {
  Eigen::MatrixXd x =
      Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(column_to_row.size()));
  for (size_t c = 0; c < column_to_row.size(); ++c) {
    x(column_to_row[c], static_cast<Eigen::Index>(c)) = 1.0;
  }
  return x;
}

Eigen::MatrixXd discretize(const Eigen::MatrixXd& y) {
  const AssignmentResult r = solve_lap(-y);
  return to_partial_permutation(r.column_to_row, static_cast<int>(y.rows()));
}

}  // namespace consmatch
