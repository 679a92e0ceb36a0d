#include "progeo/enc/checkpoint.hpp"

#include <cstring>

#include "progeo/util/io.hpp"

namespace progeo::enc {

namespace {
constexpr char kMagic[4] = {'P', 'G', 'C', 'K'};
}

std::int64_t Checkpoint::meta_int(const std::string& name, std::int64_t fallback) const {
  for (const auto& [key, value] : meta) {
    if (key == name) return value;
  }
  return fallback;
}

void Checkpoint::set_meta(const std::string& name, std::int64_t value) {
  for (auto& [key, existing] : meta) {
    if (key == name) {
      existing = value;
      return;
    }
  }
  meta.emplace_back(name, value);
}

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  util::BinWriter w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u8(kCheckpointVersion);
  w.str32(ckpt.config_echo);
  w.u64(ckpt.seed);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [name, value] : ckpt.meta) {
    w.str16(name);
    w.i64(value);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const NamedTensor& t : ckpt.tensors) {
    w.str16(t.name);
    w.u32(static_cast<std::uint32_t>(t.value.rows()));
    w.u32(static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      w.f32(t.value.data()[i]);  // row-major storage
    }
  }
  util::write_file_atomic(path, w.buffer());
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = util::read_file(path);
  util::BinReader r(data);
  char magic[4];
  const auto magic_bytes = r.take(4);
  std::memcpy(magic, magic_bytes.data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint " + path + ": bad magic bytes");
  }
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint " + path + ": version " + std::to_string(version) +
                      " unsupported, reader expects version " +
                      std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  ckpt.config_echo = r.str32();
  ckpt.seed = r.u64();
  const std::uint32_t meta_count = r.u32();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string name = r.str16();
    const std::int64_t value = r.i64();
    ckpt.meta.emplace_back(std::move(name), value);
  }
  const std::uint32_t tensor_count = r.u32();
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    NamedTensor t;
    t.name = r.str16();
    const std::uint32_t tensor_rows = r.u32();
    const std::uint32_t tensor_cols = r.u32();
    t.value.resize(tensor_rows, tensor_cols);
    for (Eigen::Index j = 0; j < t.value.size(); ++j) {
      t.value.data()[j] = r.f32();
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.exhausted()) {
    throw FormatError("checkpoint " + path + ": trailing bytes");
  }
  return ckpt;
}

void store_params(Checkpoint& ckpt, const ParamStore& params) {
  for (const Param& p : params.all()) {
    ckpt.tensors.push_back({p.name, p.tensor->value});
  }
}

void load_params(const Checkpoint& ckpt, ParamStore& params) {
  for (Param& p : params.all()) {
    const NamedTensor* t = ckpt.find(p.name);
    if (t == nullptr) {
      throw FormatError("checkpoint missing tensor '" + p.name +
                        "' (architecture mismatch?)");
    }
    if (t->value.rows() != p.tensor->rows() || t->value.cols() != p.tensor->cols()) {
      throw FormatError("checkpoint tensor '" + p.name + "' has shape " +
                        std::to_string(t->value.rows()) + "x" + std::to_string(t->value.cols()) +
                        ", model expects " + std::to_string(p.tensor->rows()) + "x" +
                        std::to_string(p.tensor->cols()));
    }
    p.tensor->value = t->value;
  }
}

}  // namespace progeo::enc
