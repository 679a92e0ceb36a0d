#include "progeo/geo/partition.hpp"

#include <cmath>

namespace progeo::geo {

void PartitionConfig::validate() const {
  if (!(cell_meters > 0.0)) throw InputError("partition: cell_meters must be > 0");
  if (!(heading_bin_degrees > 0.0) ||
      std::fmod(360.0, heading_bin_degrees) != 0.0) {
    throw InputError("partition: heading_bin_degrees must divide 360");
  }
  if (spatial_modulus < 1) throw InputError("partition: spatial_modulus must be >= 1");
  if (heading_modulus < 1) throw InputError("partition: heading_modulus must be >= 1");
  if (heading_modulus > heading_bins()) {
    throw InputError("partition: heading_modulus exceeds heading bin count");
  }
  if (min_images_per_class < 1) throw InputError("partition: min_images_per_class must be >= 1");
}

GeoClass assign_class(const GeoRecord& record, const PartitionConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(record.utm_east) || !std::isfinite(record.utm_north)) {
    throw InputError("assign_class: non-finite coordinates for " + record.image_id);
  }
  if (!(record.heading >= 0.0 && record.heading < 360.0)) {
    throw InputError("assign_class: heading out of [0, 360) for " + record.image_id);
  }
  GeoClass c;
  c.east_cell = static_cast<int>(std::floor(record.utm_east / cfg.cell_meters));
  c.north_cell = static_cast<int>(std::floor(record.utm_north / cfg.cell_meters));
  c.heading_bin = static_cast<int>(std::floor(record.heading / cfg.heading_bin_degrees));
  return c;
}

GroupKey group_of(const GeoClass& c, const PartitionConfig& cfg) {
  return GroupKey{positive_mod(c.east_cell, cfg.spatial_modulus),
                  positive_mod(c.north_cell, cfg.spatial_modulus),
                  positive_mod(c.heading_bin, cfg.heading_modulus)};
}

GroupPartition build_groups(const std::set<GeoClass>& classes, const PartitionConfig& cfg) {
  cfg.validate();
  if (classes.empty()) throw InputError("build_groups: empty class set");
  GroupPartition part;
  for (const GeoClass& c : classes) {
    const GroupKey key = group_of(c, cfg);
    part.groups[key].push_back(c);
    part.class_to_group.emplace(c, key);
  }
  return part;
}

}  // namespace progeo::geo
