#include "progeo/retrieval/embedding_dump.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "progeo/enc/checkpoint.hpp"
#include "progeo/util/io.hpp"

namespace progeo::retrieval {

namespace {
constexpr char kMagic[4] = {'P', 'G', 'E', 'O'};
}

void save_dump(const EmbeddingDump& dump, const std::string& path) {
  if (dump.rows.rows() != static_cast<Eigen::Index>(dump.ids.size())) {
    throw std::invalid_argument("embedding dump: id count does not match row count");
  }
  util::BinWriter w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u8(kDumpVersion);
  w.u32(static_cast<std::uint32_t>(dump.rows.rows()));
  w.u32(static_cast<std::uint32_t>(dump.rows.cols()));
  for (Eigen::Index i = 0; i < dump.rows.size(); ++i) {
    w.f32(dump.rows.data()[i]);  // row-major storage
  }
  std::string tail;
  for (const std::string& id : dump.ids) {
    tail += id;
    tail += '\n';
  }
  w.bytes(tail.data(), tail.size());
  util::write_file_atomic(path, w.buffer());
}

EmbeddingDump load_dump(const std::string& path) {
  const std::string data = util::read_file(path);
  util::BinReader r(data);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw enc::FormatError("embedding dump " + path + ": bad magic bytes");
  }
  const std::uint8_t version = r.u8();
  if (version != kDumpVersion) {
    throw enc::FormatError("embedding dump " + path + ": version " + std::to_string(version) +
                           " unsupported, reader expects version " + std::to_string(kDumpVersion));
  }
  EmbeddingDump dump;
  const std::uint32_t count = r.u32();
  const std::uint32_t dim = r.u32();
  dump.rows.resize(count, dim);
  for (Eigen::Index i = 0; i < dump.rows.size(); ++i) {
    const float v = r.f32();
    if (!std::isfinite(v)) {
      throw enc::FormatError("embedding dump " + path + ": non-finite value");
    }
    dump.rows.data()[i] = v;
  }
  std::string_view tail = r.take(r.remaining());
  dump.ids.reserve(count);
  std::size_t start = 0;
  while (start < tail.size()) {
    const std::size_t pos = tail.find('\n', start);
    if (pos == std::string_view::npos) {
      throw enc::FormatError("embedding dump " + path + ": unterminated id line");
    }
    dump.ids.emplace_back(tail.substr(start, pos - start));
    start = pos + 1;
  }
  if (dump.ids.size() != count) {
    throw enc::FormatError("embedding dump " + path + ": expected " + std::to_string(count) +
                           " ids, found " + std::to_string(dump.ids.size()));
  }
  return dump;
}

}  // namespace progeo::retrieval
