#pragma once

#include <string>
#include <vector>

#include "progeo/geo/types.hpp"
#include "progeo/util/image.hpp"

namespace progeo::geo {

// Renders one synthetic view. Exposed for tests; generate_synthetic_city is
// the normal entry point.
util::Image render_view(const SyntheticCityConfig& cfg, const PartitionConfig& part,
                        int east_cell, int north_cell, double heading_deg,
                        double pos_east, double pos_north, std::uint64_t render_seed);

// Writes out_dir/manifest.csv plus images/<split>/<image_id>.png for every
// record. Pixel content is a pure function of (seed, config, class, render
// index), so identical inputs reproduce the dataset byte for byte.
std::vector<GeoRecord> generate_synthetic_city(const SyntheticCityConfig& cfg,
                                               const PartitionConfig& part,
                                               const std::string& out_dir);

}  // namespace progeo::geo
