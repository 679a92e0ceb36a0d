#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace progeo::geo {

enum class Split { kDatabase, kQuery, kTrain };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct GeoRecord {
  std::string image_id;
  std::string path;  // relative to the manifest directory
  double utm_east = 0.0;
  double utm_north = 0.0;
  double heading = 0.0;  // degrees in [0, 360)
  Split split = Split::kDatabase;
};

// One M x M UTM cell crossed with a heading bin.
struct GeoClass {
  int east_cell = 0;
  int north_cell = 0;
  int heading_bin = 0;

  auto operator<=>(const GeoClass&) const = default;
};

struct PartitionConfig {
  double cell_meters = 10.0;          // M
  double heading_bin_degrees = 60.0;  // alpha
  int spatial_modulus = 3;            // N
  int heading_modulus = 2;            // L
  int min_images_per_class = 2;

  int heading_bins() const {
    return static_cast<int>(360.0 / heading_bin_degrees + 0.5);
  }

  void validate() const;
};

struct GroupKey {
  int u = 0;
  int v = 0;
  int w = 0;

  auto operator<=>(const GroupKey&) const = default;
};

struct GroupPartition {
  std::map<GroupKey, std::vector<GeoClass>> groups;
  std::map<GeoClass, GroupKey> class_to_group;
};

struct NuisanceConfig {
  double brightness_jitter = 0.0;      // multiplicative, fractional
  double hue_shift_amplitude = 0.0;    // degrees of RGB hue rotation
  double viewpoint_jitter_meters = 0.0;
};

struct SyntheticCityConfig {
  double extent_east = 200.0;   // meters
  double extent_north = 200.0;  // meters
  int image_size = 32;          // pixels, square
  int renders_per_class = 8;    // train split
  int db_renders_per_class = 4;
  int queries_per_class = 4;
  NuisanceConfig nuisance;
  std::uint64_t seed = 1;

  void validate(const PartitionConfig& part) const;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace progeo::geo
