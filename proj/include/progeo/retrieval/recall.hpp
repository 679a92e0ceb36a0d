#pragma once

#include <utility>
#include <vector>

#include "progeo/retrieval/embedding_dump.hpp"

namespace progeo::retrieval {

struct Utm {
  double east = 0.0;
  double north = 0.0;
};

struct RecallConfig {
  std::vector<int> ns = {1, 5};
  double positive_radius_m = 25.0;
};

struct RecallReport {
  std::vector<int> ns;
  double positive_radius_m = 25.0;
  std::vector<double> recall;  // aligned with ns, non-decreasing
  std::vector<std::vector<int>> rankings;    // per query, ranked db indices
  std::vector<std::vector<bool>> is_match;   // per query, per rank: within radius

  double r_at(int n) const;
};

// A query is correct at n when any of its top-n database entries lies within
// positive_radius_m planar UTM meters.
RecallReport recall_at_n(const std::vector<std::vector<int>>& rankings,
                         const std::vector<Utm>& query_positions,
                         const std::vector<Utm>& database_positions, const RecallConfig& cfg);

}  // namespace progeo::retrieval
