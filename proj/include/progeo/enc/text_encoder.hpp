#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "progeo/enc/blocks.hpp"
#include "progeo/enc/config.hpp"
#include "progeo/enc/params.hpp"

namespace progeo::enc {

// Per-class learnable placeholder vectors for the four X slots of the fixed
// prompt template "A photo of a X X X X street."
class PromptBank {
 public:
  static constexpr int kSlotsPerClass = 4;

  PromptBank(int num_classes, int text_width, std::uint64_t seed);

  int num_classes() const { return num_classes_; }
  int width() const { return width_; }
  nn::TensorPtr context() const { return context_; }

  // The (4, width) learnable slice for one class.
  nn::TensorPtr context_for_class(int class_id) const;

 private:
  int num_classes_;
  int width_;
  nn::TensorPtr context_;  // (num_classes * 4, width)
};

// Toy text tower. The template token ids are fixed; per-class prompt context
// vectors are injected at the X positions and the EOS-position output (after
// norm and projection) is the text feature.
class TextEncoder {
 public:
  static constexpr int kTemplateTokens = 12;

  TextEncoder(TextEncoderConfig cfg, std::uint64_t seed);

  const TextEncoderConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // One feature row per class id; empty input gives a (0, output_dim) batch.
  nn::TensorPtr encode_prompted(const std::vector<int>& class_ids, const PromptBank& bank) const;

  void set_trainable(bool trainable);

 private:
  nn::TensorPtr encode_class(int class_id, const PromptBank& bank) const;

  TextEncoderConfig cfg_;
  ParamStore params_;
  nn::TensorPtr embed_;  // (vocab_size, width)
  nn::TensorPtr pos_;    // (kTemplateTokens, width)
  std::vector<TransformerBlock> blocks_;
  nn::TensorPtr final_gamma_, final_beta_, proj_w_, proj_b_;
};

}  // namespace progeo::enc
