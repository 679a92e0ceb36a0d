#pragma once

#include <string>
#include <vector>

#include "progeo/geo/types.hpp"

namespace progeo::geo {

// CSV with header `image_id,path,utm_east,utm_north,heading,split`.
// Parse/validation failures name the offending line.
std::vector<GeoRecord> load_manifest(const std::string& path);

void save_manifest(const std::vector<GeoRecord>& records, const std::string& path);

// Drops train-split records whose class has fewer than min_images_per_class
// train images. Returns the number of dropped classes; logs the count.
int drop_sparse_classes(std::vector<GeoRecord>& records, const PartitionConfig& cfg);

// load_manifest + drop_sparse_classes.
std::vector<GeoRecord> load_manifest(const std::string& path, const PartitionConfig& cfg);

std::vector<GeoRecord> records_for_split(const std::vector<GeoRecord>& records, Split split);

}  // namespace progeo::geo
