#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "progeo/enc/params.hpp"
#include "progeo/nn/tensor.hpp"

namespace progeo::enc {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  nn::MatF value;
};

// Self-describing container: magic, version, resolved-config echo, seed,
// named int64 metadata, then named f32 tensors (row-major little-endian).
// Write/read round-trips are bit-exact.
struct Checkpoint {
  std::string config_echo;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::int64_t>> meta;
  std::vector<NamedTensor> tensors;

  std::int64_t meta_int(const std::string& name, std::int64_t fallback) const;
  void set_meta(const std::string& name, std::int64_t value);
  const NamedTensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies every parameter of the store into the checkpoint.
void store_params(Checkpoint& ckpt, const ParamStore& params);

// Loads values back into an existing store. Missing tensors or shape
// mismatches raise FormatError naming the parameter, which is how loading a
// checkpoint into the wrong architecture fails.
void load_params(const Checkpoint& ckpt, ParamStore& params);

}  // namespace progeo::enc
