#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "progeo/nn/tensor.hpp"
#include "progeo/util/rng.hpp"

namespace testutil {

template <typename S>
progeo::nn::MatX<S> random_matrix(progeo::util::Rng& rng, int rows, int cols,
                                  double lo = -1.0, double hi = 1.0) {
  progeo::nn::MatX<S> m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = static_cast<S>(rng.uniform(lo, hi));
    }
  }
  return m;
}

// Central finite differences of a scalar-valued function of one matrix input,
// independent of the autograd path it checks.
inline progeo::nn::MatD numeric_gradient(
    const std::function<double(const progeo::nn::MatD&)>& f, const progeo::nn::MatD& x,
    double step = 1e-4) {
  progeo::nn::MatD g(x.rows(), x.cols());
  progeo::nn::MatD probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      probe(i, j) = x(i, j) + step;
      const double hi = f(probe);
      probe(i, j) = x(i, j) - step;
      const double lo = f(probe);
      probe(i, j) = x(i, j);
      g(i, j) = (hi - lo) / (2.0 * step);
    }
  }
  return g;
}

// Max relative error between analytic and numeric gradients with an absolute
// floor so near-zero entries compare sanely.
inline double max_rel_error(const progeo::nn::MatD& analytic, const progeo::nn::MatD& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
      const double denom =
          std::max({1.0, std::abs(analytic(i, j)), std::abs(numeric(i, j))});
      worst = std::max(worst, std::abs(analytic(i, j) - numeric(i, j)) / denom);
    }
  }
  return worst;
}

}  // namespace testutil
