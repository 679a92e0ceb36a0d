#include "progeo/geo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "progeo/geo/manifest.hpp"
#include "progeo/geo/partition.hpp"
#include "progeo/util/hash.hpp"
#include "progeo/util/log.hpp"
#include "progeo/util/rng.hpp"

namespace progeo::geo {

namespace {

constexpr int kFieldGrid = 5;  // control points per cell edge
constexpr double kNoiseWeight = 0.65;
constexpr double kGradWeight = 0.35;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t tag, int a, int b, int c, int d) {
  std::uint64_t s = util::Rng::mix(base, tag);
  s = util::Rng::mix(s, static_cast<std::uint64_t>(static_cast<std::int64_t>(a)));
  s = util::Rng::mix(s, static_cast<std::uint64_t>(static_cast<std::int64_t>(b)));
  s = util::Rng::mix(s, static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  s = util::Rng::mix(s, static_cast<std::uint64_t>(static_cast<std::int64_t>(d)));
  return s;
}

// Per-cell coarse value-noise control grid, one value per channel.
struct CellField {
  double values[kFieldGrid][kFieldGrid][3];
};

CellField make_field(std::uint64_t city_seed, int east_cell, int north_cell) {
  CellField f;
  util::Rng rng(stream_seed(city_seed, util::fnv1a("field"), east_cell, north_cell, 0, 0));
  for (int i = 0; i < kFieldGrid; ++i) {
    for (int j = 0; j < kFieldGrid; ++j) {
      for (int ch = 0; ch < 3; ++ch) {
        f.values[i][j][ch] = rng.uniform();
      }
    }
  }
  return f;
}

// Bilinear sample of the cell field at fractional cell coordinates in [0, 1].
double sample_field(const CellField& f, double fx, double fy, int ch) {
  const double gx = std::clamp(fx, 0.0, 1.0) * (kFieldGrid - 1);
  const double gy = std::clamp(fy, 0.0, 1.0) * (kFieldGrid - 1);
  const int x0 = std::min(static_cast<int>(gx), kFieldGrid - 2);
  const int y0 = std::min(static_cast<int>(gy), kFieldGrid - 2);
  const double dx = gx - x0;
  const double dy = gy - y0;
  return f.values[y0][x0][ch] * (1 - dy) * (1 - dx) + f.values[y0][x0 + 1][ch] * (1 - dy) * dx +
         f.values[y0 + 1][x0][ch] * dy * (1 - dx) + f.values[y0 + 1][x0 + 1][ch] * dy * dx;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
}

}  // namespace

void SyntheticCityConfig::validate(const PartitionConfig& part) const {
  part.validate();
  if (!(extent_east > 0.0) || !(extent_north > 0.0)) {
    throw InputError("city: extents must be positive");
  }
  if (image_size <= 0) throw InputError("city: image_size must be positive");
  if (renders_per_class <= 0 || db_renders_per_class <= 0 || queries_per_class <= 0) {
    throw InputError("city: render counts must be positive");
  }
  if (nuisance.brightness_jitter < 0.0 || nuisance.hue_shift_amplitude < 0.0 ||
      nuisance.viewpoint_jitter_meters < 0.0) {
    throw InputError("city: nuisance settings must be non-negative");
  }
  if (!(nuisance.viewpoint_jitter_meters < part.cell_meters / 2.0)) {
    throw InputError("city: viewpoint_jitter_meters must stay below half a cell");
  }
}

util::Image render_view(const SyntheticCityConfig& cfg, const PartitionConfig& part,
                        int east_cell, int north_cell, double heading_deg,
                        double pos_east, double pos_north, std::uint64_t render_seed) {
  const double m = part.cell_meters;
  // Viewing window sized so any jittered camera keeps it inside the cell.
  const double view = std::max(m - 2.0 * cfg.nuisance.viewpoint_jitter_meters, 0.1 * m);

  const CellField field = make_field(cfg.seed, east_cell, north_cell);

  util::Rng rng(render_seed);
  const double brightness = 1.0 + rng.uniform(-1.0, 1.0) * cfg.nuisance.brightness_jitter;
  const double hue_rad = rng.uniform(-1.0, 1.0) * cfg.nuisance.hue_shift_amplitude * kDegToRad;

  // Rotation about the gray axis (1,1,1)/sqrt(3).
  const double cos_h = std::cos(hue_rad);
  const double sin_h = std::sin(hue_rad);
  const double one_third = 1.0 / 3.0;
  const double sqrt3_inv = 1.0 / std::sqrt(3.0);
  double rot[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double eye = (i == j) ? 1.0 : 0.0;
      // sign of the cross-product term for axis (1,1,1)/sqrt(3)
      const double cross = ((j - i + 3) % 3 == 1) ? -sqrt3_inv : ((i == j) ? 0.0 : sqrt3_inv);
      rot[i][j] = cos_h * eye + (1.0 - cos_h) * one_third + sin_h * cross;
    }
  }

  const double theta = heading_deg * kDegToRad;
  const double dir_x = std::cos(theta);
  const double dir_y = std::sin(theta);

  const double cell_x0 = east_cell * m;
  const double cell_y0 = north_cell * m;
  const double win_x0 = pos_east - view / 2.0;
  const double win_y0 = pos_north - view / 2.0;

  util::Image img(cfg.image_size, cfg.image_size);
  const double half_diag = view * std::numbers::sqrt2 / 2.0;
  for (int py = 0; py < cfg.image_size; ++py) {
    for (int px = 0; px < cfg.image_size; ++px) {
      const double x = win_x0 + (px + 0.5) / cfg.image_size * view;
      const double y = win_y0 + (py + 0.5) / cfg.image_size * view;
      const double fx = (x - cell_x0) / m;
      const double fy = (y - cell_y0) / m;
      const double grad =
          0.5 + 0.5 * (dir_x * (x - pos_east) + dir_y * (y - pos_north)) / half_diag;
      double rgb[3];
      for (int ch = 0; ch < 3; ++ch) {
        rgb[ch] = kNoiseWeight * sample_field(field, fx, fy, ch) + kGradWeight * grad;
      }
      double out[3];
      for (int i = 0; i < 3; ++i) {
        out[i] = brightness * (rot[i][0] * rgb[0] + rot[i][1] * rgb[1] + rot[i][2] * rgb[2]);
      }
      img.set(px, py, quantize(out[0]), quantize(out[1]), quantize(out[2]));
    }
  }
  return img;
}

std::vector<GeoRecord> generate_synthetic_city(const SyntheticCityConfig& cfg,
                                               const PartitionConfig& part,
                                               const std::string& out_dir) {
  cfg.validate(part);
  const int cells_east = std::max(1, static_cast<int>(cfg.extent_east / part.cell_meters));
  const int cells_north = std::max(1, static_cast<int>(cfg.extent_north / part.cell_meters));
  const int bins = part.heading_bins();
  const double m = part.cell_meters;
  const double vj = cfg.nuisance.viewpoint_jitter_meters;

  struct SplitPlan {
    Split split;
    const char* tag;
    int count;
  };
  const SplitPlan plans[] = {
      {Split::kTrain, "train", cfg.renders_per_class},
      {Split::kDatabase, "database", cfg.db_renders_per_class},
      {Split::kQuery, "query", cfg.queries_per_class},
  };

  std::vector<GeoRecord> records;
  for (int e = 0; e < cells_east; ++e) {
    for (int n = 0; n < cells_north; ++n) {
      for (int h = 0; h < bins; ++h) {
        const double heading = (h + 0.5) * part.heading_bin_degrees;
        const double center_x = (e + 0.5) * m;
        const double center_y = (n + 0.5) * m;
        for (const SplitPlan& plan : plans) {
          for (int r = 0; r < plan.count; ++r) {
            const std::uint64_t seed =
                stream_seed(cfg.seed, util::fnv1a(plan.tag), e, n, h, r);
            util::Rng rng(seed);
            const double pos_x = center_x + rng.uniform(-vj, vj);
            const double pos_y = center_y + rng.uniform(-vj, vj);

            GeoRecord rec;
            rec.image_id = std::string(plan.tag) + "_e" + std::to_string(e) + "_n" +
                           std::to_string(n) + "_h" + std::to_string(h) + "_r" +
                           std::to_string(r);
            rec.path = "images/" + std::string(plan.tag) + "/" + rec.image_id + ".png";
            rec.utm_east = pos_x;
            rec.utm_north = pos_y;
            rec.heading = heading;
            rec.split = plan.split;

            const util::Image img = render_view(cfg, part, e, n, heading, pos_x, pos_y,
                                                util::Rng::mix(seed, util::fnv1a("render")));
            util::write_png(img, (std::filesystem::path(out_dir) / rec.path).string());
            records.push_back(std::move(rec));
          }
        }
      }
    }
  }

  save_manifest(records, (std::filesystem::path(out_dir) / "manifest.csv").string());
  util::log_info("generated synthetic city: " + std::to_string(cells_east * cells_north) +
                 " cells x " + std::to_string(bins) + " heading bins, " +
                 std::to_string(records.size()) + " images under " + out_dir);
  return records;
}

}  // namespace progeo::geo
