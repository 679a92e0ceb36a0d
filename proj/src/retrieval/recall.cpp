#include "progeo/retrieval/recall.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace progeo::retrieval {

double RecallReport::r_at(int n) const {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == n) return recall[i];
  }
  throw std::out_of_range("recall report has no entry for n=" + std::to_string(n));
}

RecallReport recall_at_n(const std::vector<std::vector<int>>& rankings,
                         const std::vector<Utm>& query_positions,
                         const std::vector<Utm>& database_positions, const RecallConfig& cfg) {
  if (database_positions.empty()) {
    throw std::invalid_argument("recall_at_n: empty database");
  }
  if (rankings.size() != query_positions.size()) {
    throw std::invalid_argument("recall_at_n: rankings/queries size mismatch");
  }
  if (cfg.ns.empty() || !std::is_sorted(cfg.ns.begin(), cfg.ns.end())) {
    throw std::invalid_argument("recall_at_n: ns must be sorted and non-empty");
  }

  RecallReport report;
  report.ns = cfg.ns;
  report.positive_radius_m = cfg.positive_radius_m;
  report.rankings = rankings;
  report.is_match.resize(rankings.size());

  const double r2 = cfg.positive_radius_m * cfg.positive_radius_m;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    report.is_match[q].reserve(rankings[q].size());
    for (int db_index : rankings[q]) {
      if (db_index < 0 || db_index >= static_cast<int>(database_positions.size())) {
        throw std::invalid_argument("recall_at_n: database index out of range");
      }
      const double de = query_positions[q].east - database_positions[db_index].east;
      const double dn = query_positions[q].north - database_positions[db_index].north;
      report.is_match[q].push_back(de * de + dn * dn <= r2);
    }
  }

  for (int n : cfg.ns) {
    int correct = 0;
    for (const auto& matches : report.is_match) {
      const std::size_t limit = std::min<std::size_t>(matches.size(), static_cast<std::size_t>(n));
      for (std::size_t r = 0; r < limit; ++r) {
        if (matches[r]) {
          ++correct;
          break;
        }
      }
    }
    report.recall.push_back(rankings.empty() ? 0.0
                                             : static_cast<double>(correct) /
                                                   static_cast<double>(rankings.size()));
  }
  return report;
}

}  // namespace progeo::retrieval
