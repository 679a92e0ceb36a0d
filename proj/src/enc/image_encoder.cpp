#include "progeo/enc/image_encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "progeo/enc/pos_interp.hpp"

namespace progeo::enc {

std::string to_string(ImageFamily f) {
  return f == ImageFamily::kConv ? "conv" : "transformer";
}

ImageFamily image_family_from_string(const std::string& s) {
  if (s == "conv") return ImageFamily::kConv;
  if (s == "transformer") return ImageFamily::kTransformer;
  throw std::invalid_argument("unknown image encoder family '" + s + "'");
}

ImageEncoder::ImageEncoder(ImageEncoderConfig cfg, std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  if (cfg_.family == ImageFamily::kConv) {
    build_conv(seed);
  } else {
    build_transformer(seed);
  }
  norm_gamma_ = params_.add("image.norm.gamma", kNeverFreeze, nn::MatF::Ones(1, cfg_.width));
  norm_beta_ = params_.add("image.norm.beta", kNeverFreeze, nn::MatF::Zero(1, cfg_.width));
  head_w_ = params_.add(
      "image.head.w", kNeverFreeze,
      nn::normal_init<float>(seed, "image.head.w", cfg_.width, cfg_.output_dim,
                             1.0 / std::sqrt(static_cast<double>(cfg_.width))));
  head_b_ = params_.add("image.head.b", kNeverFreeze, nn::MatF::Zero(1, cfg_.output_dim));
}

void ImageEncoder::build_conv(std::uint64_t seed) {
  const int w = cfg_.width;
  stem_w_ = params_.add("image.stem.w", 0,
                        nn::kaiming_init<float>(seed, "image.stem.w", 9 * 3, w));
  stem_b_ = params_.add("image.stem.b", 0, nn::MatF::Zero(1, w));
  stem_side_ = (cfg_.input_size + 2 - 3) / 2 + 1;

  int side = stem_side_;
  for (int i = 0; i < cfg_.depth; ++i) {
    ConvBlock block;
    block.stride = side > 4 ? 2 : 1;
    block_sides_.push_back(side);
    const std::string prefix = "image.block" + std::to_string(i) + ".";
    const int tag = i + 1;
    block.conv1_w = params_.add(prefix + "conv1.w", tag,
                                nn::kaiming_init<float>(seed, prefix + "conv1.w", 9 * w, w));
    block.conv1_b = params_.add(prefix + "conv1.b", tag, nn::MatF::Zero(1, w));
    block.conv2_w = params_.add(prefix + "conv2.w", tag,
                                nn::kaiming_init<float>(seed, prefix + "conv2.w", 9 * w, w));
    block.conv2_b = params_.add(prefix + "conv2.b", tag, nn::MatF::Zero(1, w));
    if (block.stride != 1) {
      block.skip_w = params_.add(prefix + "skip.w", tag,
                                 nn::kaiming_init<float>(seed, prefix + "skip.w", w, w));
    }
    side = (side + 2 - 3) / block.stride + 1;
    conv_blocks_.push_back(std::move(block));
  }
}

void ImageEncoder::build_transformer(std::uint64_t seed) {
  const int w = cfg_.width;
  const int patch_dim = cfg_.patch_size * cfg_.patch_size * 3;
  const int tokens = cfg_.token_grid() * cfg_.token_grid() + 1;
  patch_w_ = params_.add("image.embed.w", 0,
                         nn::normal_init<float>(seed, "image.embed.w", patch_dim, w,
                                                1.0 / std::sqrt(static_cast<double>(patch_dim))));
  patch_b_ = params_.add("image.embed.b", 0, nn::MatF::Zero(1, w));
  cls_ = params_.add("image.cls", 0, nn::normal_init<float>(seed, "image.cls", 1, w, 0.02));
  pos_ = params_.add("image.pos", 0, nn::normal_init<float>(seed, "image.pos", tokens, w, 0.02));
  for (int i = 0; i < cfg_.depth; ++i) {
    tf_blocks_.push_back(TransformerBlock::create(
        params_, "image.block" + std::to_string(i) + ".", i + 1, w, cfg_.heads, seed));
  }
}

nn::MatF ImageEncoder::image_to_input(const util::Image& img) {
  nn::MatF m(static_cast<Eigen::Index>(img.width) * img.height, 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.at(x, y);
      const Eigen::Index row = static_cast<Eigen::Index>(y) * img.width + x;
      for (int c = 0; c < 3; ++c) {
        m(row, c) = static_cast<float>(p[c]) / 127.5f - 1.0f;
      }
    }
  }
  return m;
}

nn::TensorPtr ImageEncoder::forward_conv(const nn::MatF& image) const {
  nn::ConvGeom stem_geom{cfg_.input_size, cfg_.input_size, 3, 3, 2, 1};
  auto x = nn::constant<float>(image);
  x = nn::relu(nn::add_rowvec(nn::matmul(nn::im2col(x, stem_geom), stem_w_), stem_b_));

  for (std::size_t i = 0; i < conv_blocks_.size(); ++i) {
    const ConvBlock& b = conv_blocks_[i];
    const int side = block_sides_[i];
    nn::ConvGeom g1{side, side, cfg_.width, 3, b.stride, 1};
    const int out_side = g1.out_height();
    nn::ConvGeom g2{out_side, out_side, cfg_.width, 3, 1, 1};

    auto h = nn::relu(nn::add_rowvec(nn::matmul(nn::im2col(x, g1), b.conv1_w), b.conv1_b));
    h = nn::add_rowvec(nn::matmul(nn::im2col(h, g2), b.conv2_w), b.conv2_b);

    nn::TensorPtr skip = x;
    if (b.stride != 1) {
      nn::ConvGeom gs{side, side, cfg_.width, 1, b.stride, 0};
      skip = nn::matmul(nn::im2col(x, gs), b.skip_w);
    }
    x = nn::relu(nn::add(h, skip));
  }

  auto pooled = nn::layer_norm(nn::col_mean(x), norm_gamma_, norm_beta_);
  return nn::add_rowvec(nn::matmul(pooled, head_w_), head_b_);
}

nn::TensorPtr ImageEncoder::forward_transformer(const nn::MatF& image) const {
  nn::ConvGeom patch_geom{cfg_.input_size, cfg_.input_size, 3,
                          cfg_.patch_size, cfg_.patch_size, 0};
  auto x = nn::constant<float>(image);
  auto tokens = nn::add_rowvec(nn::matmul(nn::im2col(x, patch_geom), patch_w_), patch_b_);
  auto seq = nn::add(nn::concat_rows<float>({cls_, tokens}), pos_);
  for (const TransformerBlock& block : tf_blocks_) {
    seq = block.forward(seq);
  }
  auto cls_out = nn::layer_norm(nn::rows(seq, 0, 1), norm_gamma_, norm_beta_);
  return nn::add_rowvec(nn::matmul(cls_out, head_w_), head_b_);
}

nn::TensorPtr ImageEncoder::encode_one(const nn::MatF& image) const {
  const Eigen::Index expected = static_cast<Eigen::Index>(cfg_.input_size) * cfg_.input_size;
  if (image.rows() != expected || image.cols() != 3) {
    throw std::invalid_argument("encode: image shape " + std::to_string(image.rows()) + "x" +
                                std::to_string(image.cols()) + " does not match input_size " +
                                std::to_string(cfg_.input_size));
  }
  return cfg_.family == ImageFamily::kConv ? forward_conv(image) : forward_transformer(image);
}

nn::TensorPtr ImageEncoder::encode(const std::vector<nn::MatF>& images) const {
  if (images.empty()) {
    return nn::constant<float>(nn::MatF::Zero(0, cfg_.output_dim));
  }
  std::vector<nn::TensorPtr> feature_rows;
  feature_rows.reserve(images.size());
  for (const nn::MatF& img : images) {
    feature_rows.push_back(encode_one(img));
  }
  return feature_rows.size() == 1 ? feature_rows.front() : nn::concat_rows(feature_rows);
}

void ImageEncoder::set_input_size(int new_input_size) {
  if (new_input_size == cfg_.input_size) return;
  if (cfg_.family == ImageFamily::kConv) {
    cfg_.input_size = new_input_size;
    cfg_.validate();
    block_sides_.clear();
    stem_side_ = (cfg_.input_size + 2 - 3) / 2 + 1;
    int side = stem_side_;
    for (ConvBlock& b : conv_blocks_) {
      b.stride = side > 4 ? 2 : 1;
      block_sides_.push_back(side);
      side = (side + 2 - 3) / b.stride + 1;
    }
    return;
  }
  const int old_grid = cfg_.token_grid();
  cfg_.input_size = new_input_size;
  cfg_.validate();
  pos_->value = interpolate_positional_encoding(pos_->value, old_grid, cfg_.token_grid(), true);
}

}  // namespace progeo::enc
