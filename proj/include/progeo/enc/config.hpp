#pragma once

#include <stdexcept>
#include <string>

namespace progeo::enc {

enum class ImageFamily { kConv, kTransformer };

std::string to_string(ImageFamily f);
ImageFamily image_family_from_string(const std::string& s);

struct ImageEncoderConfig {
  ImageFamily family = ImageFamily::kConv;
  int depth = 3;       // residual blocks or transformer blocks
  int width = 32;      // channels / token width
  int patch_size = 8;  // transformer family only
  int heads = 4;       // transformer family only
  int output_dim = 32;
  int input_size = 32;

  void validate() const {
    if (depth < 1) throw std::invalid_argument("image encoder: depth must be >= 1");
    if (width < 1 || output_dim < 1 || input_size < 1) {
      throw std::invalid_argument("image encoder: sizes must be positive");
    }
    if (family == ImageFamily::kTransformer) {
      if (patch_size < 1 || input_size % patch_size != 0) {
        throw std::invalid_argument("image encoder: input_size must be divisible by patch_size");
      }
      if (heads < 1 || width % heads != 0) {
        throw std::invalid_argument("image encoder: width must be divisible by heads");
      }
    }
  }

  int token_grid() const { return input_size / patch_size; }
};

struct TextEncoderConfig {
  int vocab_size = 8;
  int depth = 2;
  int width = 32;
  int heads = 4;
  int max_tokens = 12;
  int output_dim = 32;

  void validate() const {
    if (vocab_size < 7) throw std::invalid_argument("text encoder: vocab_size must cover the template");
    if (depth < 1 || width < 1 || output_dim < 1) {
      throw std::invalid_argument("text encoder: sizes must be positive");
    }
    if (heads < 1 || width % heads != 0) {
      throw std::invalid_argument("text encoder: width must be divisible by heads");
    }
    if (max_tokens < 12) throw std::invalid_argument("text encoder: template needs 12 tokens");
  }
};

}  // namespace progeo::enc
