#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "progeo/nn/tensor.hpp"
#include "progeo/util/hash.hpp"
#include "progeo/util/rng.hpp"

namespace progeo::nn {

// Each parameter draws from its own stream keyed by (seed, name), so init is
// independent of registration order.
inline util::Rng param_stream(std::uint64_t seed, std::string_view name) {
  return util::Rng(util::Rng::mix(seed, util::fnv1a(name)));
}

template <typename S>
MatX<S> normal_init(std::uint64_t seed, std::string_view name, Eigen::Index rows,
                    Eigen::Index cols, double stddev) {
  util::Rng rng = param_stream(seed, name);
  MatX<S> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = static_cast<S>(rng.normal(0.0, stddev));
    }
  }
  return m;
}

// He-style scaling for layers feeding a ReLU.
template <typename S>
MatX<S> kaiming_init(std::uint64_t seed, std::string_view name, Eigen::Index fan_in,
                     Eigen::Index fan_out) {
  return normal_init<S>(seed, name, fan_in, fan_out, std::sqrt(2.0 / static_cast<double>(fan_in)));
}

}  // namespace progeo::nn
