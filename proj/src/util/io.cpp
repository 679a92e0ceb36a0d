#include "progeo/util/io.hpp"

#include <filesystem>
#include <fstream>
#include <limits>

namespace progeo::util {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::string out;
  in.seekg(0, std::ios::end);
  out.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(out.data(), static_cast<std::streamsize>(out.size()));
  if (!in) {
    throw IoError("short read: " + path);
  }
  return out;
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  ensure_parent_dir(path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open for write: " + tmp);
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw IoError("short write: " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

void BinWriter::str16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw IoError("string too long for str16");
  }
  u16(static_cast<std::uint16_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinWriter::str32(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError("string too long for str32");
  }
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

std::string_view BinReader::take(std::size_t n) {
  if (pos_ + n > data_.size()) {
    throw IoError("unexpected end of data");
  }
  std::string_view v = data_.substr(pos_, n);
  pos_ += n;
  return v;
}

}  // namespace progeo::util
