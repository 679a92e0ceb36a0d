#include "progeo/retrieval/knn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace progeo::retrieval {

std::vector<std::vector<int>> knn_search(const EmbeddingDump& queries,
                                         const EmbeddingDump& database, int k) {
  if (queries.dim() != database.dim()) {
    throw std::invalid_argument("knn_search: dimension mismatch (" +
                                std::to_string(queries.dim()) + " vs " +
                                std::to_string(database.dim()) + ")");
  }
  if (k < 1 || k > database.count()) {
    throw std::invalid_argument("knn_search: k must be in [1, database count]");
  }

  std::vector<std::vector<int>> rankings(static_cast<std::size_t>(queries.count()));
  std::vector<int> order(static_cast<std::size_t>(database.count()));
  for (Eigen::Index qi = 0; qi < queries.count(); ++qi) {
    const Eigen::RowVectorXf scores = queries.rows.row(qi) * database.rows.transpose();
    std::iota(order.begin(), order.end(), 0);
    const auto better = [&](int a, int b) {
      if (scores(a) != scores(b)) return scores(a) > scores(b);
      return database.ids[static_cast<std::size_t>(a)] < database.ids[static_cast<std::size_t>(b)];
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    rankings[static_cast<std::size_t>(qi)].assign(order.begin(), order.begin() + k);
  }
  return rankings;
}

}  // namespace progeo::retrieval
