#pragma once

#include <cstdint>
#include <vector>

#include "progeo/enc/blocks.hpp"
#include "progeo/enc/config.hpp"
#include "progeo/enc/params.hpp"
#include "progeo/util/image.hpp"

namespace progeo::enc {

// Toy image tower. The conv family is a strided residual stack with a global
// average pooling head; the transformer family is a small patch transformer
// whose CLS token output feeds the projection head. Both emit output_dim
// features per image.
class ImageEncoder {
 public:
  ImageEncoder(ImageEncoderConfig cfg, std::uint64_t seed);

  const ImageEncoderConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  // Input matrices are (H*W, 3) in [-1, 1], row index y*W + x.
  nn::TensorPtr encode_one(const nn::MatF& image) const;
  nn::TensorPtr encode(const std::vector<nn::MatF>& images) const;  // (B, output_dim)

  // Rescales the learned positional table when moving to a new input size
  // (transformer family only; no-op for conv).
  void set_input_size(int new_input_size);

  static nn::MatF image_to_input(const util::Image& img);

 private:
  struct ConvBlock {
    int stride = 1;
    nn::TensorPtr conv1_w, conv1_b, conv2_w, conv2_b;
    nn::TensorPtr skip_w;  // 1x1 projection when strided
  };

  void build_conv(std::uint64_t seed);
  void build_transformer(std::uint64_t seed);
  nn::TensorPtr forward_conv(const nn::MatF& image) const;
  nn::TensorPtr forward_transformer(const nn::MatF& image) const;

  ImageEncoderConfig cfg_;
  std::uint64_t seed_ = 0;
  ParamStore params_;

  // conv family
  nn::TensorPtr stem_w_, stem_b_;
  std::vector<ConvBlock> conv_blocks_;
  std::vector<int> block_sides_;  // spatial side entering each block
  int stem_side_ = 0;

  // transformer family
  nn::TensorPtr patch_w_, patch_b_, cls_, pos_;
  std::vector<TransformerBlock> tf_blocks_;

  // shared head
  nn::TensorPtr norm_gamma_, norm_beta_, head_w_, head_b_;
};

}  // namespace progeo::enc
