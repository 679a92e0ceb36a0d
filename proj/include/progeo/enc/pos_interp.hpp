#pragma once

#include "progeo/nn/tensor.hpp"

namespace progeo::enc {

// Bilinearly resizes a learned positional table laid out as an optional CLS
// row followed by src_side*src_side rows in row-major grid order. The CLS row
// is copied unchanged; equal grids return the input exactly.
nn::MatF interpolate_positional_encoding(const nn::MatF& pe, int src_side, int dst_side,
                                         bool has_cls);

}  // namespace progeo::enc
