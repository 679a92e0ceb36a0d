#include "progeo/geo/manifest.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

#include "progeo/geo/partition.hpp"
#include "progeo/util/io.hpp"
#include "progeo/util/log.hpp"

namespace progeo::geo {

namespace {

constexpr const char* kHeader = "image_id,path,utm_east,utm_north,heading,split";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, int line_no, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InputError("manifest line " + std::to_string(line_no) + ": bad " + field + " '" + s + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::kDatabase: return "database";
    case Split::kQuery: return "query";
    case Split::kTrain: return "train";
  }
  throw InputError("unknown split");
}

Split split_from_string(const std::string& s) {
  if (s == "database") return Split::kDatabase;
  if (s == "query") return Split::kQuery;
  if (s == "train") return Split::kTrain;
  throw InputError("unknown split '" + s + "'");
}

std::vector<GeoRecord> load_manifest(const std::string& path) {
  const std::string text = util::read_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<GeoRecord> records;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kHeader) {
        throw InputError("manifest line 1: expected header '" + std::string(kHeader) + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 6) {
      throw InputError("manifest line " + std::to_string(line_no) + ": expected 6 fields, got " +
                       std::to_string(f.size()));
    }
    GeoRecord r;
    r.image_id = f[0];
    r.path = f[1];
    r.utm_east = parse_double(f[2], line_no, "utm_east");
    r.utm_north = parse_double(f[3], line_no, "utm_north");
    r.heading = parse_double(f[4], line_no, "heading");
    try {
      r.split = split_from_string(f[5]);
    } catch (const InputError&) {
      throw InputError("manifest line " + std::to_string(line_no) + ": bad split '" + f[5] + "'");
    }
    if (r.image_id.empty()) {
      throw InputError("manifest line " + std::to_string(line_no) + ": empty image_id");
    }
    if (!(r.heading >= 0.0 && r.heading < 360.0)) {
      throw InputError("manifest line " + std::to_string(line_no) + ": heading out of [0, 360)");
    }
    if (!seen_ids.insert(r.image_id).second) {
      throw InputError("manifest line " + std::to_string(line_no) + ": duplicate image_id '" +
                       r.image_id + "'");
    }
    records.push_back(std::move(r));
  }
  return records;
}

void save_manifest(const std::vector<GeoRecord>& records, const std::string& path) {
  std::string out = kHeader;
  out += '\n';
  for (const GeoRecord& r : records) {
    out += r.image_id;
    out += ',';
    out += r.path;
    out += ',';
    out += format_double(r.utm_east);
    out += ',';
    out += format_double(r.utm_north);
    out += ',';
    out += format_double(r.heading);
    out += ',';
    out += to_string(r.split);
    out += '\n';
  }
  util::write_file_atomic(path, out);
}

int drop_sparse_classes(std::vector<GeoRecord>& records, const PartitionConfig& cfg) {
  std::map<GeoClass, int> counts;
  for (const GeoRecord& r : records) {
    if (r.split == Split::kTrain) counts[assign_class(r, cfg)] += 1;
  }
  std::unordered_set<std::size_t> drop_rows;
  int dropped_classes = 0;
  for (const auto& [cls, count] : counts) {
    if (count < cfg.min_images_per_class) ++dropped_classes;
  }
  if (dropped_classes == 0) return 0;
  std::vector<GeoRecord> kept;
  kept.reserve(records.size());
  int dropped_records = 0;
  for (GeoRecord& r : records) {
    if (r.split == Split::kTrain && counts[assign_class(r, cfg)] < cfg.min_images_per_class) {
      ++dropped_records;
      continue;
    }
    kept.push_back(std::move(r));
  }
  records = std::move(kept);
  util::log_info("dropped " + std::to_string(dropped_classes) + " sparse classes (" +
                 std::to_string(dropped_records) + " train records) below min_images_per_class=" +
                 std::to_string(cfg.min_images_per_class));
  return dropped_classes;
}

std::vector<GeoRecord> load_manifest(const std::string& path, const PartitionConfig& cfg) {
  std::vector<GeoRecord> records = load_manifest(path);
  drop_sparse_classes(records, cfg);
  return records;
}

std::vector<GeoRecord> records_for_split(const std::vector<GeoRecord>& records, Split split) {
  std::vector<GeoRecord> out;
  for (const GeoRecord& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

}  // namespace progeo::geo
