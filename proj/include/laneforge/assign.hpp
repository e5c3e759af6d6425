// Copyright 2026 The LaneForge Authors. All Rights Reserved.
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

#pragma once

// Dynamic label assignment between proposal lanes and ground-truth lanes.
//
// cost(p, g) = (1 - score_p) + (1 - GLIoU(p, g)). Each gt asks for
// k_g = clamp(round(sum of its top-k_max positive GLIoUs), 1, k_max)
// proposals (never more than it shares slices with). Proposals go to at most
// one gt. Among all such assignments the chosen one maximizes, in order:
// the number of gts that get at least one proposal, the number of filled
// slots, then minimizes the summed cost.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "laneforge/hungarian.hpp"
#include "laneforge/losses.hpp"

namespace laneforge {

struct Proposal {
  Lane lane;
  double score = 0.0;
};

struct AssignParams {
  GliouParams gliou;
  int k_max = 4;
};

struct Match {
  std::size_t proposal = 0;
  std::size_t gt = 0;
  double cost = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

struct AssignResult {
  std::vector<Match> matches;           // sorted by proposal index
  std::vector<int> gt_of_proposal;      // -1 marks a negative
  std::vector<int> k_per_gt;
};

/// Pairwise GLIoU and cost. Pairs without a shared slice have no value.
struct AssignCosts {
  std::size_t proposals = 0;
  std::size_t gts = 0;
  std::vector<std::optional<double>> gliou;  // proposal-major
  std::vector<std::optional<double>> cost;

  const std::optional<double>& gliou_at(std::size_t p, std::size_t g) const {
    return gliou[p * gts + g];
  }
  const std::optional<double>& cost_at(std::size_t p, std::size_t g) const {
    return cost[p * gts + g];
  }
};

inline AssignCosts assignment_costs(std::span<const Proposal> proposals,
                                    std::span<const Lane> gts,
                                    const GliouParams& p) {
  AssignCosts c;
  c.proposals = proposals.size();
  c.gts = gts.size();
  c.gliou.resize(c.proposals * c.gts);
  c.cost.resize(c.proposals * c.gts);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double score = proposals[i].score;
    if (!(score >= 0.0 && score <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "proposal score outside [0, 1]");
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
      try {
        const double iou = gliou(proposals[i].lane, gts[g], p);
        c.gliou[i * c.gts + g] = iou;
        c.cost[i * c.gts + g] = (1.0 - score) + (1.0 - iou);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoOverlapSlices) throw;
      }
    }
  }
  return c;
}

/// Number of proposals each gt asks for.
inline std::vector<int> dynamic_ks(const AssignCosts& c, int k_max) {
  std::vector<int> ks(c.gts, 0);
  for (std::size_t g = 0; g < c.gts; ++g) {
    std::vector<double> positives;
    int feasible = 0;
    for (std::size_t p = 0; p < c.proposals; ++p) {
      const auto& iou = c.gliou_at(p, g);
      if (!iou) continue;
      ++feasible;
      positives.push_back(std::max(0.0, *iou));
    }
    if (feasible == 0) continue;
    std::sort(positives.begin(), positives.end(), std::greater<>());
    const std::size_t top = std::min<std::size_t>(positives.size(), k_max);
    double sum = 0.0;
    for (std::size_t i = 0; i < top; ++i) sum += positives[i];
    const int k = std::clamp(static_cast<int>(std::lround(sum)), 1, k_max);
    ks[g] = std::min(k, feasible);
  }
  return ks;
}

inline AssignResult dynamic_assign(std::span<const Proposal> proposals,
                                   std::span<const Lane> gts,
                                   const AssignParams& params = {}) {
  if (params.k_max < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k_max must be >= 1");
  }
  if (proposals.empty()) {
    throw Error(ErrorCode::kEmptyProposals, "no proposals to assign");
  }
  AssignResult result;
  result.gt_of_proposal.assign(proposals.size(), -1);
  if (gts.empty()) return result;

  const AssignCosts costs = assignment_costs(proposals, gts, params.gliou);
  result.k_per_gt = dynamic_ks(costs, params.k_max);

  // One row per requested slot; columns are proposals followed by one
  // "leave empty" column per slot.
  struct Slot {
    std::size_t gt;
    bool primary;
  };
  std::vector<Slot> slots;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (int r = 0; r < result.k_per_gt[g]; ++r) slots.push_back({g, r == 0});
  }
  if (slots.empty()) return result;

  const int n_slots = static_cast<int>(slots.size());
  const int n_props = static_cast<int>(proposals.size());
  // Costs are < 4, so these bonuses make the objective lexicographic.
  const double extra_bonus = 4.0 * n_slots + 1.0;
  const double primary_bonus = (n_slots + 1) * extra_bonus;
  constexpr double kInfeasible = 1.0;

  CostMatrix m(n_slots, n_props + n_slots, 0.0);
  for (int s = 0; s < n_slots; ++s) {
    for (int p = 0; p < n_props; ++p) {
      const auto& c = costs.cost_at(static_cast<std::size_t>(p), slots[s].gt);
      m(s, p) = c ? *c - (slots[s].primary ? primary_bonus : extra_bonus)
                  : kInfeasible;
    }
  }
  const auto row_to_col = min_cost_assignment(m);
  for (int s = 0; s < n_slots; ++s) {
    const int p = row_to_col[s];
    if (p < 0 || p >= n_props) continue;
    const auto& c = costs.cost_at(static_cast<std::size_t>(p), slots[s].gt);
    if (!c) continue;
    result.matches.push_back({static_cast<std::size_t>(p), slots[s].gt, *c});
    result.gt_of_proposal[p] = static_cast<int>(slots[s].gt);
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const Match& l, const Match& r) { return l.proposal < r.proposal; });
  return result;
}

}  // namespace laneforge
