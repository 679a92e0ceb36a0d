#include "progeo/retrieval/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "progeo/util/image.hpp"
#include "progeo/util/io.hpp"

namespace progeo::retrieval {

namespace {

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_metrics_csv(const RecallReport& report, const std::string& dataset,
                       const std::string& path) {
  std::string out = "dataset,n,radius_m,recall\n";
  for (std::size_t i = 0; i < report.ns.size(); ++i) {
    out += dataset;
    out += ',';
    out += std::to_string(report.ns[i]);
    out += ',';
    out += format_fixed(report.positive_radius_m, 1);
    out += ',';
    out += format_fixed(report.recall[i], 6);
    out += '\n';
  }
  util::write_file_atomic(path, out);
}

void render_query_strips(const RecallReport& report, const std::vector<std::string>& query_ids,
                         const std::vector<std::string>& database_ids,
                         const std::map<std::string, std::string>& image_paths,
                         const std::string& out_dir, int max_queries) {
  std::filesystem::create_directories(out_dir);
  const int strips = std::min<int>(static_cast<int>(report.rankings.size()), max_queries);
  constexpr int kTop = 5;
  constexpr int kBorder = 2;
  constexpr int kGap = 4;

  for (int q = 0; q < strips; ++q) {
    const auto load = [&](const std::string& id) {
      const auto it = image_paths.find(id);
      if (it == image_paths.end()) {
        throw std::invalid_argument("render_query_strips: no image path for id '" + id + "'");
      }
      return util::read_png(it->second);
    };
    const util::Image query_img = load(query_ids[static_cast<std::size_t>(q)]);
    const int tile = query_img.width + 2 * kBorder;
    const int shown =
        std::min<int>(kTop, static_cast<int>(report.rankings[static_cast<std::size_t>(q)].size()));
    util::Image strip((tile + kGap) * (shown + 1) - kGap, tile, 255);

    auto place = [&](const util::Image& img, int slot, bool framed, bool match) {
      const int x0 = slot * (tile + kGap);
      util::blit(strip, img, x0 + kBorder, kBorder);
      if (framed) {
        if (match) {
          util::draw_border(strip, x0, 0, tile, tile, kBorder, 0, 200, 0);
        } else {
          util::draw_border(strip, x0, 0, tile, tile, kBorder, 220, 0, 0);
        }
      } else {
        util::draw_border(strip, x0, 0, tile, tile, kBorder, 40, 40, 40);
      }
    };

    place(query_img, 0, false, false);
    for (int r = 0; r < shown; ++r) {
      const int db_index = report.rankings[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)];
      const util::Image db_img = load(database_ids[static_cast<std::size_t>(db_index)]);
      place(db_img, r + 1, true, report.is_match[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)]);
    }
    const std::string name = "strip_" + query_ids[static_cast<std::size_t>(q)] + ".png";
    util::write_png(strip, (std::filesystem::path(out_dir) / name).string());
  }
}

void render_ablation_curve(const std::vector<AblationPoint>& points, const std::string& png_path,
                           const std::string& csv_path) {
  if (points.empty()) throw std::invalid_argument("render_ablation_curve: no points");

  std::string csv = "frozen_layers,trainable_params,r_at_1\n";
  for (const AblationPoint& p : points) {
    csv += std::to_string(p.frozen_layers);
    csv += ',';
    csv += std::to_string(p.trainable_params);
    csv += ',';
    csv += format_fixed(p.r_at_1, 6);
    csv += '\n';
  }
  util::write_file_atomic(csv_path, csv);

  constexpr int kW = 480, kH = 320;
  constexpr int kMarginL = 56, kMarginR = 20, kMarginT = 28, kMarginB = 44;
  util::Image img(kW, kH, 255);

  int max_layers = 1;
  for (const AblationPoint& p : points) max_layers = std::max(max_layers, p.frozen_layers);

  const auto px = [&](double frozen) {
    return kMarginL +
           static_cast<int>((kW - kMarginL - kMarginR) * frozen / static_cast<double>(max_layers));
  };
  const auto py = [&](double recall) {
    return kH - kMarginB - static_cast<int>((kH - kMarginT - kMarginB) * recall);
  };

  // axes and gridlines at 0, 0.5, 1
  util::draw_line(img, kMarginL, kMarginT, kMarginL, kH - kMarginB, 0, 0, 0);
  util::draw_line(img, kMarginL, kH - kMarginB, kW - kMarginR, kH - kMarginB, 0, 0, 0);
  for (double g : {0.0, 0.5, 1.0}) {
    util::draw_line(img, kMarginL - 3, py(g), kMarginL, py(g), 0, 0, 0);
    util::draw_text(img, 8, py(g) - 3, format_fixed(g, 1), 0, 0, 0);
  }

  std::vector<AblationPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end(),
            [](const AblationPoint& a, const AblationPoint& b) {
              return a.frozen_layers < b.frozen_layers;
            });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    util::draw_line(img, px(sorted[i].frozen_layers), py(sorted[i].r_at_1),
                    px(sorted[i + 1].frozen_layers), py(sorted[i + 1].r_at_1), 30, 60, 200);
  }
  for (const AblationPoint& p : sorted) {
    util::draw_disc(img, px(p.frozen_layers), py(p.r_at_1), 3, 30, 60, 200);
    util::draw_text(img, px(p.frozen_layers) - 8, kH - kMarginB + 8, std::to_string(p.frozen_layers),
                    0, 0, 0);
  }
  util::draw_text(img, kMarginL, 8, "R:1 VS FROZEN LAYERS", 0, 0, 0);
  util::draw_text(img, kW / 2 - 40, kH - 16, "FROZEN LAYERS", 0, 0, 0);
  util::write_png(img, png_path);
}

}  // namespace progeo::retrieval
