#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

namespace progeo::nn {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatF = MatX<float>;
using MatD = MatX<double>;

// Node of a dynamically built reverse-mode graph. Values and gradients are
// dense row-major matrices; scalar results are 1x1. Children point at their
// parents, so releasing the root releases the whole graph while leaf
// parameters (held elsewhere) survive with their accumulated gradients.
template <typename S>
struct TensorT {
  using Mat = MatX<S>;

  Mat value;
  Mat grad;  // allocated on first accumulation, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorT>> parents;
  std::function<void(TensorT&)> backward_fn;

  TensorT() = default;
  explicit TensorT(Mat v, bool rg = false) : value(std::move(v)), requires_grad(rg) {}

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }

  void ensure_grad() {
    if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
      grad.setZero(value.rows(), value.cols());
    }
  }

  void zero_grad() {
    if (grad.size() > 0) grad.setZero();
  }

  S scalar() const {
    if (value.size() != 1) throw std::logic_error("tensor is not scalar");
    return value(0, 0);
  }
};

template <typename S>
using TensorPtrT = std::shared_ptr<TensorT<S>>;

using Tensor = TensorT<float>;
using TensorPtr = TensorPtrT<float>;

template <typename S>
TensorPtrT<S> constant(MatX<S> v) {
  return std::make_shared<TensorT<S>>(std::move(v), false);
}

template <typename S>
TensorPtrT<S> parameter(MatX<S> v) {
  return std::make_shared<TensorT<S>>(std::move(v), true);
}

template <typename S>
TensorPtrT<S> make_op(MatX<S> value, std::vector<TensorPtrT<S>> parents,
                      std::function<void(TensorT<S>&)> backward_fn) {
  auto node = std::make_shared<TensorT<S>>(std::move(value));
  for (const auto& p : parents) {
    if (p->requires_grad) {
      node->requires_grad = true;
      break;
    }
  }
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return node;
}

// Accumulates d(root)/d(leaf) into every reachable node with requires_grad.
// The root is seeded with ones, so a non-scalar root backpropagates the sum
// of its entries.
template <typename S>
void backward(const TensorPtrT<S>& root) {
  if (!root->requires_grad) return;

  std::vector<TensorT<S>*> order;
  std::unordered_set<TensorT<S>*> visited;
  struct Frame {
    TensorT<S>* node;
    std::size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.node->parents.size()) {
      TensorT<S>* p = f.node->parents[f.next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad.setOnes();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorT<S>* node = *it;
    if (node->backward_fn) {
      node->ensure_grad();
      node->backward_fn(*node);
    }
  }
}

}  // namespace progeo::nn
