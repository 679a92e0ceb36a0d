#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "progeo/nn/tensor.hpp"

namespace progeo::enc {

// Layer tag 0 marks the stem/embedding stage; block i carries tag i+1. Heads
// and final norms use kNeverFreeze.
inline constexpr int kNeverFreeze = std::numeric_limits<int>::max();

struct Param {
  std::string name;
  int layer_tag = kNeverFreeze;
  nn::TensorPtr tensor;
};

class ParamStore {
 public:
  nn::TensorPtr add(std::string name, int layer_tag, nn::MatF value);

  const std::vector<Param>& all() const { return params_; }
  std::vector<Param>& all() { return params_; }

  nn::TensorPtr find(std::string_view name) const;

  std::vector<nn::TensorPtr> trainable() const;
  std::int64_t trainable_scalar_count() const;

  // Order-insensitive digest of names, shapes and raw f32 payloads.
  std::uint64_t value_hash() const;

  void zero_grads() const;

 private:
  std::vector<Param> params_;
};

}  // namespace progeo::enc
