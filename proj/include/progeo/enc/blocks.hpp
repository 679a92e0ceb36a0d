#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "progeo/enc/params.hpp"
#include "progeo/nn/init.hpp"
#include "progeo/nn/ops.hpp"

namespace progeo::enc {

// Pre-norm transformer block over a single (tokens, width) sequence.
struct TransformerBlock {
  int width = 0;
  int heads = 1;
  nn::TensorPtr ln1_gamma, ln1_beta;
  nn::TensorPtr wq, bq, wk, bk, wv, bv, wo, bo;
  nn::TensorPtr ln2_gamma, ln2_beta;
  nn::TensorPtr w1, b1, w2, b2;

  static TransformerBlock create(ParamStore& store, const std::string& prefix, int layer_tag,
                                 int width, int heads, std::uint64_t seed);

  nn::TensorPtr forward(nn::TensorPtr x) const;
};

}  // namespace progeo::enc
