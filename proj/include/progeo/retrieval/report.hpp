#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "progeo/retrieval/recall.hpp"

namespace progeo::retrieval {

// Comma-separated `dataset,n,radius_m,recall`, one row per n.
void write_metrics_csv(const RecallReport& report, const std::string& dataset,
                       const std::string& path);

// Per-query strips: the query image followed by its top-5 matches, each match
// framed green (within radius) or red. image_paths maps ids to files.
void render_query_strips(const RecallReport& report, const std::vector<std::string>& query_ids,
                         const std::vector<std::string>& database_ids,
                         const std::map<std::string, std::string>& image_paths,
                         const std::string& out_dir, int max_queries = 8);

struct AblationPoint {
  int frozen_layers = 0;
  std::int64_t trainable_params = 0;
  double r_at_1 = 0.0;
};

// Frozen-layer sweep: recall curve png plus a csv of the points.
void render_ablation_curve(const std::vector<AblationPoint>& points, const std::string& png_path,
                           const std::string& csv_path);

}  // namespace progeo::retrieval
