#pragma once

#include <vector>

#include "progeo/retrieval/embedding_dump.hpp"

namespace progeo::retrieval {

// Exact top-k by inner product, one ranked index list per query. Ties break
// by ascending image_id.
std::vector<std::vector<int>> knn_search(const EmbeddingDump& queries,
                                         const EmbeddingDump& database, int k);

}  // namespace progeo::retrieval
