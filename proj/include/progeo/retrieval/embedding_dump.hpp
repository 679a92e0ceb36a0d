#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "progeo/nn/tensor.hpp"

namespace progeo::retrieval {

// On-disk retrieval corpus: `PGEO` magic, one version byte, u32 LE count and
// dim, count*dim f32 LE row-major, then one UTF-8 id per line. Readers reject
// unknown versions.
inline constexpr std::uint8_t kDumpVersion = 1;

struct EmbeddingDump {
  nn::MatF rows;                 // (count, dim)
  std::vector<std::string> ids;  // count entries
  std::uint64_t checkpoint_hash = 0;  // provenance, in-memory only

  std::int64_t count() const { return rows.rows(); }
  std::int64_t dim() const { return rows.cols(); }
};

void save_dump(const EmbeddingDump& dump, const std::string& path);
EmbeddingDump load_dump(const std::string& path);

}  // namespace progeo::retrieval
