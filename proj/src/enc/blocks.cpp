#include "progeo/enc/blocks.hpp"

namespace progeo::enc {

TransformerBlock TransformerBlock::create(ParamStore& store, const std::string& prefix,
                                          int layer_tag, int width, int heads,
                                          std::uint64_t seed) {
  TransformerBlock b;
  b.width = width;
  b.heads = heads;
  auto dense = [&](const std::string& name, int rows, int cols, double stddev) {
    return store.add(prefix + name, layer_tag,
                     nn::normal_init<float>(seed, prefix + name, rows, cols, stddev));
  };
  const double attn_std = 1.0 / std::sqrt(static_cast<double>(width));
  b.ln1_gamma = store.add(prefix + "ln1.gamma", layer_tag, nn::MatF::Ones(1, width));
  b.ln1_beta = store.add(prefix + "ln1.beta", layer_tag, nn::MatF::Zero(1, width));
  b.wq = dense("attn.q.w", width, width, attn_std);
  b.bq = store.add(prefix + "attn.q.b", layer_tag, nn::MatF::Zero(1, width));
  b.wk = dense("attn.k.w", width, width, attn_std);
  b.bk = store.add(prefix + "attn.k.b", layer_tag, nn::MatF::Zero(1, width));
  b.wv = dense("attn.v.w", width, width, attn_std);
  b.bv = store.add(prefix + "attn.v.b", layer_tag, nn::MatF::Zero(1, width));
  b.wo = dense("attn.o.w", width, width, attn_std);
  b.bo = store.add(prefix + "attn.o.b", layer_tag, nn::MatF::Zero(1, width));
  b.ln2_gamma = store.add(prefix + "ln2.gamma", layer_tag, nn::MatF::Ones(1, width));
  b.ln2_beta = store.add(prefix + "ln2.beta", layer_tag, nn::MatF::Zero(1, width));
  b.w1 = dense("mlp.fc1.w", width, 4 * width, attn_std);
  b.b1 = store.add(prefix + "mlp.fc1.b", layer_tag, nn::MatF::Zero(1, 4 * width));
  b.w2 = dense("mlp.fc2.w", 4 * width, width, 0.5 / std::sqrt(static_cast<double>(width)));
  b.b2 = store.add(prefix + "mlp.fc2.b", layer_tag, nn::MatF::Zero(1, width));
  return b;
}

nn::TensorPtr TransformerBlock::forward(nn::TensorPtr x) const {
  const int head_dim = width / heads;
  const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(head_dim));

  auto h = nn::layer_norm(x, ln1_gamma, ln1_beta);
  auto q = nn::add_rowvec(nn::matmul(h, wq), bq);
  auto k = nn::add_rowvec(nn::matmul(h, wk), bk);
  auto v = nn::add_rowvec(nn::matmul(h, wv), bv);

  std::vector<nn::TensorPtr> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(heads));
  for (int hd = 0; hd < heads; ++hd) {
    auto qh = nn::cols(q, hd * head_dim, head_dim);
    auto kh = nn::cols(k, hd * head_dim, head_dim);
    auto vh = nn::cols(v, hd * head_dim, head_dim);
    auto attn = nn::row_softmax(nn::scale(nn::matmul_nt(qh, kh), inv_sqrt));
    head_outputs.push_back(nn::matmul(attn, vh));
  }
  auto merged = (heads == 1) ? head_outputs.front() : nn::concat_cols(head_outputs);
  x = nn::add(x, nn::add_rowvec(nn::matmul(merged, wo), bo));

  auto h2 = nn::layer_norm(x, ln2_gamma, ln2_beta);
  auto m = nn::gelu(nn::add_rowvec(nn::matmul(h2, w1), b1));
  m = nn::add_rowvec(nn::matmul(m, w2), b2);
  return nn::add(x, m);
}

}  // namespace progeo::enc
