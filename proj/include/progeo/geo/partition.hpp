#pragma once

#include <set>

#include "progeo/geo/types.hpp"

namespace progeo::geo {

// Mathematically non-negative residue, defined for negative cell indices.
inline int positive_mod(int value, int modulus) {
  const int r = value % modulus;
  return r < 0 ? r + modulus : r;
}

// Floor quantization of UTM position and heading into cell/bin indices.
GeoClass assign_class(const GeoRecord& record, const PartitionConfig& cfg);

GroupKey group_of(const GeoClass& c, const PartitionConfig& cfg);

// Buckets classes by (e mod N, n mod N, h mod L). Every class lands in
// exactly one group; at most N*N*L groups are non-empty.
GroupPartition build_groups(const std::set<GeoClass>& classes, const PartitionConfig& cfg);

}  // namespace progeo::geo
