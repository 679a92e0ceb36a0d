#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "progeo/nn/tensor.hpp"

namespace progeo::nn {

template <typename S>
void check_same_shape(const TensorPtrT<S>& a, const TensorPtrT<S>& b, const char* op) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                std::to_string(a->rows()) + "x" + std::to_string(a->cols()) +
                                " vs " + std::to_string(b->rows()) + "x" +
                                std::to_string(b->cols()) + ")");
  }
}

// ---- arithmetic -----------------------------------------------------------

template <typename S>
TensorPtrT<S> add(TensorPtrT<S> a, TensorPtrT<S> b) {
  check_same_shape(a, b, "add");
  MatX<S> v = a->value + b->value;
  return make_op<S>(std::move(v), {a, b}, [a, b](TensorT<S>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += self.grad;
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad += self.grad;
    }
  });
}

template <typename S>
TensorPtrT<S> sub(TensorPtrT<S> a, TensorPtrT<S> b) {
  check_same_shape(a, b, "sub");
  MatX<S> v = a->value - b->value;
  return make_op<S>(std::move(v), {a, b}, [a, b](TensorT<S>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += self.grad;
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad -= self.grad;
    }
  });
}

// Adds a 1xC row vector to every row.
template <typename S>
TensorPtrT<S> add_rowvec(TensorPtrT<S> a, TensorPtrT<S> bias) {
  if (bias->rows() != 1 || bias->cols() != a->cols()) {
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
  }
  MatX<S> v = a->value.rowwise() + bias->value.row(0);
  return make_op<S>(std::move(v), {a, bias}, [a, bias](TensorT<S>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += self.grad;
    }
    if (bias->requires_grad) {
      bias->ensure_grad();
      bias->grad.row(0) += self.grad.colwise().sum();
    }
  });
}

template <typename S>
TensorPtrT<S> scale(TensorPtrT<S> a, S k) {
  MatX<S> v = a->value * k;
  return make_op<S>(std::move(v), {a}, [a, k](TensorT<S>& self) {
    a->ensure_grad();
    a->grad += self.grad * k;
  });
}

template <typename S>
TensorPtrT<S> add_scalar(TensorPtrT<S> a, S k) {
  MatX<S> v = a->value.array() + k;
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad += self.grad;
  });
}

template <typename S>
TensorPtrT<S> hadamard(TensorPtrT<S> a, TensorPtrT<S> b) {
  check_same_shape(a, b, "hadamard");
  MatX<S> v = a->value.cwiseProduct(b->value);
  return make_op<S>(std::move(v), {a, b}, [a, b](TensorT<S>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += self.grad.cwiseProduct(b->value);
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad += self.grad.cwiseProduct(a->value);
    }
  });
}

// ---- matmul ---------------------------------------------------------------

template <typename S>
TensorPtrT<S> matmul(TensorPtrT<S> a, TensorPtrT<S> b) {
  if (a->cols() != b->rows()) throw std::invalid_argument("matmul: inner dims differ");
  MatX<S> v = a->value * b->value;
  return make_op<S>(std::move(v), {a, b}, [a, b](TensorT<S>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += self.grad * b->value.transpose();
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad += a->value.transpose() * self.grad;
    }
  });
}

// a * b^T; the natural shape for similarity matrices.
template <typename S>
TensorPtrT<S> matmul_nt(TensorPtrT<S> a, TensorPtrT<S> b) {
  if (a->cols() != b->cols()) throw std::invalid_argument("matmul_nt: feature dims differ");
  MatX<S> v = a->value * b->value.transpose();
  return make_op<S>(std::move(v), {a, b}, [a, b](TensorT<S>& self) {
    if (a->requires_grad) {
      a->ensure_grad();
      a->grad += self.grad * b->value;
    }
    if (b->requires_grad) {
      b->ensure_grad();
      b->grad += self.grad.transpose() * a->value;
    }
  });
}

// ---- nonlinearities -------------------------------------------------------

template <typename S>
TensorPtrT<S> relu(TensorPtrT<S> a) {
  MatX<S> v = a->value.cwiseMax(S(0));
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.array() += self.grad.array() * (a->value.array() > S(0)).template cast<S>();
  });
}

template <typename S>
TensorPtrT<S> gelu(TensorPtrT<S> a) {
  const S inv_sqrt2 = S(1) / std::numbers::sqrt2_v<S>;
  MatX<S> v = a->value.unaryExpr([inv_sqrt2](S x) {
    return S(0.5) * x * (S(1) + std::erf(x * inv_sqrt2));
  });
  return make_op<S>(std::move(v), {a}, [a, inv_sqrt2](TensorT<S>& self) {
    a->ensure_grad();
    const S inv_sqrt2pi = S(1) / std::sqrt(S(2) * std::numbers::pi_v<S>);
    a->grad.array() += self.grad.array() * a->value.array().unaryExpr([=](S x) {
      const S cdf = S(0.5) * (S(1) + std::erf(x * inv_sqrt2));
      const S pdf = inv_sqrt2pi * std::exp(S(-0.5) * x * x);
      return cdf + x * pdf;
    });
  });
}

// Elementwise sqrt(x + eps); inputs must be non-negative.
template <typename S>
TensorPtrT<S> sqrt_shifted(TensorPtrT<S> a, S eps) {
  MatX<S> v = (a->value.array() + eps).sqrt();
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.array() += self.grad.array() * (S(0.5) / self.value.array());
  });
}

// ---- softmax / normalization ----------------------------------------------

template <typename S>
TensorPtrT<S> row_softmax(TensorPtrT<S> a) {
  MatX<S> v = a->value;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const S m = v.row(i).maxCoeff();
    v.row(i) = (v.row(i).array() - m).exp();
    v.row(i) /= v.row(i).sum();
  }
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    for (Eigen::Index i = 0; i < self.value.rows(); ++i) {
      const S dot = self.grad.row(i).dot(self.value.row(i));
      a->grad.row(i).array() +=
          self.value.row(i).array() * (self.grad.row(i).array() - dot);
    }
  });
}

template <typename S>
TensorPtrT<S> row_log_softmax(TensorPtrT<S> a) {
  MatX<S> v = a->value;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const S m = v.row(i).maxCoeff();
    const S lse = m + std::log((v.row(i).array() - m).exp().sum());
    v.row(i).array() -= lse;
  }
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    for (Eigen::Index i = 0; i < self.value.rows(); ++i) {
      const S gsum = self.grad.row(i).sum();
      a->grad.row(i).array() +=
          self.grad.row(i).array() - self.value.row(i).array().exp() * gsum;
    }
  });
}

// Divides each row by its L2 norm. Throws on (near-)zero rows.
template <typename S>
TensorPtrT<S> l2_normalize_rows(TensorPtrT<S> a) {
  const S tiny = S(1e-12);
  MatX<S> v = a->value;
  std::vector<S> norms(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const S n = v.row(i).norm();
    if (!(n > tiny)) {
      throw std::invalid_argument("l2_normalize_rows: zero-norm row " + std::to_string(i));
    }
    norms[static_cast<std::size_t>(i)] = n;
    v.row(i) /= n;
  }
  return make_op<S>(std::move(v), {a}, [a, norms = std::move(norms)](TensorT<S>& self) {
    a->ensure_grad();
    for (Eigen::Index i = 0; i < self.value.rows(); ++i) {
      const S dot = self.grad.row(i).dot(self.value.row(i));
      a->grad.row(i) +=
          (self.grad.row(i) - dot * self.value.row(i)) / norms[static_cast<std::size_t>(i)];
    }
  });
}

// Per-row layer norm with learnable 1xC gain/offset.
template <typename S>
TensorPtrT<S> layer_norm(TensorPtrT<S> x, TensorPtrT<S> gamma, TensorPtrT<S> beta,
                         S eps = S(1e-5)) {
  if (gamma->rows() != 1 || gamma->cols() != x->cols() || beta->rows() != 1 ||
      beta->cols() != x->cols()) {
    throw std::invalid_argument("layer_norm: gamma/beta must be 1 x cols");
  }
  const Eigen::Index c = x->cols();
  MatX<S> xhat(x->rows(), c);
  std::vector<S> inv_std(static_cast<std::size_t>(x->rows()));
  for (Eigen::Index i = 0; i < x->rows(); ++i) {
    const S mean = x->value.row(i).mean();
    const S var = (x->value.row(i).array() - mean).square().sum() / S(c);
    const S istd = S(1) / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(i)] = istd;
    xhat.row(i) = (x->value.row(i).array() - mean) * istd;
  }
  MatX<S> v = (xhat.array().rowwise() * gamma->value.row(0).array()).rowwise() +
              beta->value.row(0).array();
  return make_op<S>(std::move(v), {x, gamma, beta},
                    [x, gamma, beta, xhat = std::move(xhat),
                     inv_std = std::move(inv_std)](TensorT<S>& self) {
                      if (beta->requires_grad) {
                        beta->ensure_grad();
                        beta->grad.row(0) += self.grad.colwise().sum();
                      }
                      if (gamma->requires_grad) {
                        gamma->ensure_grad();
                        gamma->grad.row(0) += self.grad.cwiseProduct(xhat).colwise().sum();
                      }
                      if (x->requires_grad) {
                        x->ensure_grad();
                        for (Eigen::Index i = 0; i < x->rows(); ++i) {
                          Eigen::Array<S, 1, Eigen::Dynamic> dxhat =
                              self.grad.row(i).array() * gamma->value.row(0).array();
                          const S mean_dxhat = dxhat.mean();
                          const S mean_dxhat_xhat = (dxhat * xhat.row(i).array()).mean();
                          x->grad.row(i).array() +=
                              inv_std[static_cast<std::size_t>(i)] *
                              (dxhat - mean_dxhat - xhat.row(i).array() * mean_dxhat_xhat);
                        }
                      }
                    });
}

// ---- reductions -----------------------------------------------------------

template <typename S>
TensorPtrT<S> sum_all(TensorPtrT<S> a) {
  MatX<S> v(1, 1);
  v(0, 0) = a->value.sum();
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.array() += self.grad(0, 0);
  });
}

template <typename S>
TensorPtrT<S> mean_all(TensorPtrT<S> a) {
  if (a->value.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
  MatX<S> v(1, 1);
  v(0, 0) = a->value.mean();
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.array() += self.grad(0, 0) / S(a->value.size());
  });
}

// Sum over columns -> (rows, 1).
template <typename S>
TensorPtrT<S> row_sum(TensorPtrT<S> a) {
  MatX<S> v = a->value.rowwise().sum();
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.colwise() += self.grad.col(0);
  });
}

// Mean over rows -> (1, cols); global average pooling when rows are positions.
template <typename S>
TensorPtrT<S> col_mean(TensorPtrT<S> a) {
  if (a->rows() == 0) throw std::invalid_argument("col_mean: no rows");
  MatX<S> v = a->value.colwise().mean();
  return make_op<S>(std::move(v), {a}, [a](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.rowwise() += self.grad.row(0) / S(a->rows());
  });
}

// sum(w .* a) as a 1x1 tensor; w is a fixed weight matrix.
template <typename S>
TensorPtrT<S> weighted_sum(TensorPtrT<S> a, MatX<S> w) {
  if (w.rows() != a->rows() || w.cols() != a->cols()) {
    throw std::invalid_argument("weighted_sum: weight shape mismatch");
  }
  MatX<S> v(1, 1);
  v(0, 0) = a->value.cwiseProduct(w).sum();
  return make_op<S>(std::move(v), {a}, [a, w = std::move(w)](TensorT<S>& self) {
    a->ensure_grad();
    a->grad += self.grad(0, 0) * w;
  });
}

// ---- slicing / assembly ---------------------------------------------------

template <typename S>
TensorPtrT<S> rows(TensorPtrT<S> a, Eigen::Index r0, Eigen::Index n) {
  if (r0 < 0 || n < 0 || r0 + n > a->rows()) throw std::out_of_range("rows: slice out of range");
  MatX<S> v = a->value.middleRows(r0, n);
  return make_op<S>(std::move(v), {a}, [a, r0, n](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.middleRows(r0, n) += self.grad;
  });
}

template <typename S>
TensorPtrT<S> cols(TensorPtrT<S> a, Eigen::Index c0, Eigen::Index n) {
  if (c0 < 0 || n < 0 || c0 + n > a->cols()) throw std::out_of_range("cols: slice out of range");
  MatX<S> v = a->value.middleCols(c0, n);
  return make_op<S>(std::move(v), {a}, [a, c0, n](TensorT<S>& self) {
    a->ensure_grad();
    a->grad.middleCols(c0, n) += self.grad;
  });
}

template <typename S>
TensorPtrT<S> concat_rows(const std::vector<TensorPtrT<S>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  const Eigen::Index c = parts.front()->cols();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p->cols() != c) throw std::invalid_argument("concat_rows: column mismatch");
    total += p->rows();
  }
  MatX<S> v(total, c);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    v.middleRows(r, p->rows()) = p->value;
    r += p->rows();
  }
  return make_op<S>(std::move(v), parts, [parts](TensorT<S>& self) {
    Eigen::Index r = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        p->grad += self.grad.middleRows(r, p->rows());
      }
      r += p->rows();
    }
  });
}

template <typename S>
TensorPtrT<S> concat_cols(const std::vector<TensorPtrT<S>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  const Eigen::Index r = parts.front()->rows();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p->rows() != r) throw std::invalid_argument("concat_cols: row mismatch");
    total += p->cols();
  }
  MatX<S> v(r, total);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    v.middleCols(c, p->cols()) = p->value;
    c += p->cols();
  }
  return make_op<S>(std::move(v), parts, [parts](TensorT<S>& self) {
    Eigen::Index c = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        p->grad += self.grad.middleCols(c, p->cols());
      }
      c += p->cols();
    }
  });
}

// Row gather; duplicate indices accumulate gradients, which is what embedding
// lookups need.
template <typename S>
TensorPtrT<S> gather_rows(TensorPtrT<S> a, std::vector<int> idx) {
  MatX<S> v(static_cast<Eigen::Index>(idx.size()), a->cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= a->rows()) {
      throw std::out_of_range("gather_rows: index " + std::to_string(idx[k]) + " out of range");
    }
    v.row(static_cast<Eigen::Index>(k)) = a->value.row(idx[k]);
  }
  return make_op<S>(std::move(v), {a}, [a, idx = std::move(idx)](TensorT<S>& self) {
    a->ensure_grad();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      a->grad.row(idx[k]) += self.grad.row(static_cast<Eigen::Index>(k));
    }
  });
}

// Picks individual entries -> (n, 1).
template <typename S>
TensorPtrT<S> select_items(TensorPtrT<S> a, std::vector<std::pair<int, int>> items) {
  MatX<S> v(static_cast<Eigen::Index>(items.size()), 1);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto [i, j] = items[k];
    if (i < 0 || i >= a->rows() || j < 0 || j >= a->cols()) {
      throw std::out_of_range("select_items: index out of range");
    }
    v(static_cast<Eigen::Index>(k), 0) = a->value(i, j);
  }
  return make_op<S>(std::move(v), {a}, [a, items = std::move(items)](TensorT<S>& self) {
    a->ensure_grad();
    for (std::size_t k = 0; k < items.size(); ++k) {
      a->grad(items[k].first, items[k].second) += self.grad(static_cast<Eigen::Index>(k), 0);
    }
  });
}

// ---- convolution support ----------------------------------------------------

struct ConvGeom {
  int height = 0;
  int width = 0;
  int channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;

  int out_height() const { return (height + 2 * pad - kernel) / stride + 1; }
  int out_width() const { return (width + 2 * pad - kernel) / stride + 1; }
};

// Input x is (H*W, C) with row index y*W + x. Output is
// (Ho*Wo, kernel*kernel*C); out-of-bounds taps read zero. A conv layer is then
// im2col(x) * kernel_matrix.
template <typename S>
TensorPtrT<S> im2col(TensorPtrT<S> x, const ConvGeom& g) {
  if (x->rows() != Eigen::Index(g.height) * g.width || x->cols() != g.channels) {
    throw std::invalid_argument("im2col: input shape does not match geometry");
  }
  const int ho = g.out_height();
  const int wo = g.out_width();
  const int taps = g.kernel * g.kernel;
  // pixel index per (output position, tap); -1 for padding
  std::vector<int> map(static_cast<std::size_t>(ho) * wo * taps, -1);
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      const int r = oy * wo + ox;
      for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
          const int iy = oy * g.stride - g.pad + ky;
          const int ix = ox * g.stride - g.pad + kx;
          if (iy >= 0 && iy < g.height && ix >= 0 && ix < g.width) {
            map[static_cast<std::size_t>(r) * taps + ky * g.kernel + kx] = iy * g.width + ix;
          }
        }
      }
    }
  }
  MatX<S> v = MatX<S>::Zero(Eigen::Index(ho) * wo, Eigen::Index(taps) * g.channels);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (int t = 0; t < taps; ++t) {
      const int src = map[static_cast<std::size_t>(r) * taps + t];
      if (src >= 0) {
        v.block(r, Eigen::Index(t) * g.channels, 1, g.channels) = x->value.row(src);
      }
    }
  }
  const int channels = g.channels;
  return make_op<S>(std::move(v), {x},
                    [x, map = std::move(map), taps, channels](TensorT<S>& self) {
                      x->ensure_grad();
                      for (Eigen::Index r = 0; r < self.value.rows(); ++r) {
                        for (int t = 0; t < taps; ++t) {
                          const int src = map[static_cast<std::size_t>(r) * taps + t];
                          if (src >= 0) {
                            x->grad.row(src) +=
                                self.grad.block(r, Eigen::Index(t) * channels, 1, channels);
                          }
                        }
                      }
                    });
}

}  // namespace progeo::nn
