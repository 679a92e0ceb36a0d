#include "progeo/enc/text_encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace progeo::enc {

namespace {

// vocabulary: 0=BOS 1=a 2=photo 3=of 4=street 5=period 6=EOS
// "A photo of a X X X X street." with X slots at positions 5..8
constexpr std::array<int, 5> kPrefixIds = {0, 1, 2, 3, 1};
constexpr std::array<int, 3> kSuffixIds = {4, 5, 6};

}  // namespace

PromptBank::PromptBank(int num_classes, int text_width, std::uint64_t seed)
    : num_classes_(num_classes), width_(text_width) {
  if (num_classes < 1 || text_width < 1) {
    throw std::invalid_argument("prompt bank: needs at least one class and positive width");
  }
  context_ = nn::parameter<float>(nn::normal_init<float>(
      seed, "prompt.context", static_cast<Eigen::Index>(num_classes) * kSlotsPerClass,
      text_width, 0.02));
}

nn::TensorPtr PromptBank::context_for_class(int class_id) const {
  if (class_id < 0 || class_id >= num_classes_) {
    throw std::out_of_range("prompt bank: unknown class id " + std::to_string(class_id));
  }
  return nn::rows(context_, static_cast<Eigen::Index>(class_id) * kSlotsPerClass,
                  kSlotsPerClass);
}

TextEncoder::TextEncoder(TextEncoderConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  static_assert(kPrefixIds.size() + PromptBank::kSlotsPerClass + kSuffixIds.size() ==
                TextEncoder::kTemplateTokens);
  embed_ = params_.add("text.embed", 0,
                       nn::normal_init<float>(seed, "text.embed", cfg_.vocab_size, cfg_.width, 0.02));
  pos_ = params_.add("text.pos", 0,
                     nn::normal_init<float>(seed, "text.pos", kTemplateTokens, cfg_.width, 0.02));
  for (int i = 0; i < cfg_.depth; ++i) {
    blocks_.push_back(TransformerBlock::create(params_, "text.block" + std::to_string(i) + ".",
                                               i + 1, cfg_.width, cfg_.heads, seed));
  }
  final_gamma_ = params_.add("text.final_ln.gamma", kNeverFreeze, nn::MatF::Ones(1, cfg_.width));
  final_beta_ = params_.add("text.final_ln.beta", kNeverFreeze, nn::MatF::Zero(1, cfg_.width));
  proj_w_ = params_.add(
      "text.proj.w", kNeverFreeze,
      nn::normal_init<float>(seed, "text.proj.w", cfg_.width, cfg_.output_dim,
                             1.0 / std::sqrt(static_cast<double>(cfg_.width))));
  proj_b_ = params_.add("text.proj.b", kNeverFreeze, nn::MatF::Zero(1, cfg_.output_dim));
}

void TextEncoder::set_trainable(bool trainable) {
  for (Param& p : params_.all()) {
    p.tensor->requires_grad = trainable;
    if (!trainable) p.tensor->grad.resize(0, 0);
  }
}

nn::TensorPtr TextEncoder::encode_class(int class_id, const PromptBank& bank) const {
  std::vector<int> prefix(kPrefixIds.begin(), kPrefixIds.end());
  std::vector<int> suffix(kSuffixIds.begin(), kSuffixIds.end());
  auto seq = nn::concat_rows<float>({
      nn::gather_rows(embed_, std::move(prefix)),
      bank.context_for_class(class_id),
      nn::gather_rows(embed_, std::move(suffix)),
  });
  seq = nn::add(seq, pos_);
  for (const TransformerBlock& block : blocks_) {
    seq = block.forward(seq);
  }
  auto eos = nn::layer_norm(nn::rows(seq, kTemplateTokens - 1, 1), final_gamma_, final_beta_);
  return nn::add_rowvec(nn::matmul(eos, proj_w_), proj_b_);
}

nn::TensorPtr TextEncoder::encode_prompted(const std::vector<int>& class_ids,
                                           const PromptBank& bank) const {
  if (bank.width() != cfg_.width) {
    throw std::invalid_argument("text encoder: prompt bank width mismatch");
  }
  if (class_ids.empty()) {
    return nn::constant<float>(nn::MatF::Zero(0, cfg_.output_dim));
  }
  std::vector<nn::TensorPtr> feature_rows;
  feature_rows.reserve(class_ids.size());
  for (int id : class_ids) {
    feature_rows.push_back(encode_class(id, bank));
  }
  return feature_rows.size() == 1 ? feature_rows.front() : nn::concat_rows(feature_rows);
}

}  // namespace progeo::enc
