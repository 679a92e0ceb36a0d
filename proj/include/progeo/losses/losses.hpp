#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "progeo/nn/ops.hpp"
#include "progeo/nn/tensor.hpp"
#include "progeo/util/rng.hpp"

namespace progeo::losses {

// Shared inputs of the contrastive losses. `text` has one row per visual row
// in stage 1 (paired batch). When `normalize` is set, rows are L2-normalized
// before any dot product, matching the CLIP convention.
template <typename S>
struct SimilarityContextT {
  nn::TensorPtrT<S> visual;
  nn::TensorPtrT<S> text;
  std::vector<int> labels;
  S tau = S(0.07);
  bool normalize = true;
};

using SimilarityContext = SimilarityContextT<float>;

// Indices of the visual rows sharing each label present in a batch.
struct PositiveSet {
  std::map<int, std::vector<int>> by_label;
};

inline PositiveSet build_positive_set(const std::vector<int>& labels) {
  PositiveSet pos;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pos.by_label[labels[i]].push_back(static_cast<int>(i));
  }
  return pos;
}

// q_k = (1 - eps) * [k == target] + eps / num_classes.
struct SmoothedTarget {
  double epsilon = 0.1;
  int num_classes = 0;
  int target = 0;

  template <typename S>
  std::vector<S> distribution() const {
    if (epsilon < 0.0 || epsilon >= 1.0) throw std::invalid_argument("smoothing out of [0,1)");
    if (target < 0 || target >= num_classes) throw std::invalid_argument("target out of range");
    std::vector<S> q(static_cast<std::size_t>(num_classes),
                     static_cast<S>(epsilon / num_classes));
    q[static_cast<std::size_t>(target)] += static_cast<S>(1.0 - epsilon);
    return q;
  }
};

template <typename S>
struct LmclConfigT {
  S scale = S(30);
  S margin = S(0.40);
  nn::TensorPtrT<S> weights;  // (num_classes, dim); rows are normalized before use

  void validate() const {
    if (!(scale > S(0))) throw std::invalid_argument("lmcl: scale must be > 0");
    if (!(margin >= S(0)) || !(margin < S(1))) throw std::invalid_argument("lmcl: margin out of [0,1)");
    if (!weights) throw std::invalid_argument("lmcl: missing class weights");
  }
};

using LmclConfig = LmclConfigT<float>;

enum class TripletDistance { kEuclidean, kCosine };
enum class TripletMining { kBatchHard, kRandom };

template <typename S>
struct TripletConfigT {
  S margin = S(0.1);
  TripletDistance distance = TripletDistance::kEuclidean;
  TripletMining mining = TripletMining::kBatchHard;
};

using TripletConfig = TripletConfigT<float>;

struct Triplet {
  int anchor = 0;
  int positive = 0;
  int negative = 0;
};

namespace detail {

template <typename S>
void check_ctx(const SimilarityContextT<S>& ctx) {
  if (!(ctx.tau > S(0))) throw std::invalid_argument("contrastive loss: tau must be > 0");
  if (!ctx.visual || !ctx.text) throw std::invalid_argument("contrastive loss: missing features");
  if (ctx.visual->cols() != ctx.text->cols()) {
    throw std::invalid_argument("contrastive loss: feature dims differ");
  }
}

template <typename S>
nn::TensorPtrT<S> maybe_normalize(nn::TensorPtrT<S> t, bool normalize) {
  return normalize ? nn::l2_normalize_rows(t) : t;
}

// Squared Euclidean row distances as a (n, 1) tensor.
template <typename S>
nn::TensorPtrT<S> row_sq_dist(nn::TensorPtrT<S> a, nn::TensorPtrT<S> b) {
  auto d = nn::sub(a, b);
  return nn::row_sum(nn::hadamard(d, d));
}

template <typename S>
nn::TensorPtrT<S> row_distance(nn::TensorPtrT<S> a, nn::TensorPtrT<S> b,
                               TripletDistance distance) {
  if (distance == TripletDistance::kEuclidean) {
    // The shift keeps the gradient finite when anchor == positive.
    return nn::sqrt_shifted(row_sq_dist(a, b), S(1e-12));
  }
  auto an = nn::l2_normalize_rows(a);
  auto bn = nn::l2_normalize_rows(b);
  return nn::scale(nn::add_scalar(nn::row_sum(nn::hadamard(an, bn)), S(-1)), S(-1));
}

inline double plain_distance(const std::vector<double>& a, const std::vector<double>& b,
                             TripletDistance distance) {
  if (distance == TripletDistance::kEuclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom <= 0.0) throw std::invalid_argument("mine_triplets: zero-norm feature");
  return 1.0 - dot / denom;
}

}  // namespace detail

// Mean over the batch of -log softmax_i(V_i . T_j / tau) at j == i.
template <typename S>
nn::TensorPtrT<S> image_to_text_loss(const SimilarityContextT<S>& ctx) {
  detail::check_ctx(ctx);
  if (ctx.visual->rows() != ctx.text->rows()) {
    throw std::invalid_argument("image_to_text_loss: needs one text row per visual row");
  }
  const int b = static_cast<int>(ctx.visual->rows());
  if (b == 0) throw std::invalid_argument("image_to_text_loss: empty batch");
  auto v = detail::maybe_normalize(ctx.visual, ctx.normalize);
  auto t = detail::maybe_normalize(ctx.text, ctx.normalize);
  auto logits = nn::scale(nn::matmul_nt(v, t), S(1) / ctx.tau);
  auto logp = nn::row_log_softmax(logits);
  std::vector<std::pair<int, int>> diag;
  diag.reserve(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) diag.emplace_back(i, i);
  return nn::scale(nn::mean_all(nn::select_items(logp, std::move(diag))), S(-1));
}

// For each text row i, averages -log( exp(V_p . T_i / tau) / sum_j exp(V_j .
// T_i / tau) ) over the positives p of label_i, then takes the batch mean.
// Reduces to the transposed image_to_text_loss when all labels are unique.
template <typename S>
nn::TensorPtrT<S> text_to_image_loss(const SimilarityContextT<S>& ctx, const PositiveSet& pos) {
  detail::check_ctx(ctx);
  if (ctx.visual->rows() != ctx.text->rows()) {
    throw std::invalid_argument("text_to_image_loss: needs one text row per visual row");
  }
  const int b = static_cast<int>(ctx.visual->rows());
  if (b == 0) throw std::invalid_argument("text_to_image_loss: empty batch");
  if (static_cast<int>(ctx.labels.size()) != b) {
    throw std::invalid_argument("text_to_image_loss: labels size mismatch");
  }
  auto v = detail::maybe_normalize(ctx.visual, ctx.normalize);
  auto t = detail::maybe_normalize(ctx.text, ctx.normalize);
  auto logits = nn::scale(nn::matmul_nt(t, v), S(1) / ctx.tau);  // (B texts, B images)
  auto logp = nn::row_log_softmax(logits);

  nn::MatX<S> weights = nn::MatX<S>::Zero(b, b);
  for (int i = 0; i < b; ++i) {
    const auto it = pos.by_label.find(ctx.labels[static_cast<std::size_t>(i)]);
    if (it == pos.by_label.end() || it->second.empty()) {
      throw std::invalid_argument("text_to_image_loss: empty positive set for label " +
                                  std::to_string(ctx.labels[static_cast<std::size_t>(i)]));
    }
    const S share = S(1) / (S(b) * S(it->second.size()));
    for (int p : it->second) weights(i, p) = share;
  }
  return nn::scale(nn::weighted_sum(logp, std::move(weights)), S(-1));
}

// Stage-1 objective: the two contrastive directions added together.
template <typename S>
nn::TensorPtrT<S> stage1_loss(const SimilarityContextT<S>& ctx, const PositiveSet& pos) {
  return nn::add(image_to_text_loss(ctx), text_to_image_loss(ctx, pos));
}

// Label-smoothed cross entropy of visual rows against a fixed per-class text
// feature cache. Gradients flow into `visual` only.
template <typename S>
nn::TensorPtrT<S> smoothed_cross_entropy(nn::TensorPtrT<S> visual, const nn::MatX<S>& cache,
                                         const std::vector<int>& labels, double epsilon, S tau,
                                         bool normalize = true) {
  if (!(tau > S(0))) throw std::invalid_argument("smoothed_cross_entropy: tau must be > 0");
  const int b = static_cast<int>(visual->rows());
  const int k = static_cast<int>(cache.rows());
  if (b == 0) throw std::invalid_argument("smoothed_cross_entropy: empty batch");
  if (static_cast<int>(labels.size()) != b) {
    throw std::invalid_argument("smoothed_cross_entropy: labels size mismatch");
  }
  if (visual->cols() != cache.cols()) {
    throw std::invalid_argument("smoothed_cross_entropy: feature dims differ");
  }
  auto cache_t = nn::constant<S>(cache);
  auto v = detail::maybe_normalize(visual, normalize);
  auto c = normalize ? nn::l2_normalize_rows(cache_t) : cache_t;
  auto logp = nn::row_log_softmax(nn::scale(nn::matmul_nt(v, c), S(1) / tau));

  nn::MatX<S> weights(b, k);
  for (int i = 0; i < b; ++i) {
    SmoothedTarget target{epsilon, k, labels[static_cast<std::size_t>(i)]};
    const std::vector<S> q = target.template distribution<S>();
    for (int j = 0; j < k; ++j) weights(i, j) = q[static_cast<std::size_t>(j)] / S(b);
  }
  return nn::scale(nn::weighted_sum(logp, std::move(weights)), S(-1));
}

// CosFace-style large-margin cosine loss over scaled cosine similarities,
// with the margin subtracted from the true-class logit.
template <typename S>
nn::TensorPtrT<S> lmcl_loss(nn::TensorPtrT<S> features, const std::vector<int>& labels,
                            const LmclConfigT<S>& cfg) {
  cfg.validate();
  const int b = static_cast<int>(features->rows());
  const int k = static_cast<int>(cfg.weights->rows());
  if (b == 0) throw std::invalid_argument("lmcl_loss: empty batch");
  if (static_cast<int>(labels.size()) != b) {
    throw std::invalid_argument("lmcl_loss: labels size mismatch");
  }
  if (features->cols() != cfg.weights->cols()) {
    throw std::invalid_argument("lmcl_loss: feature dims differ");
  }
  auto f = nn::l2_normalize_rows(features);
  auto w = nn::l2_normalize_rows(cfg.weights);
  auto cosines = nn::matmul_nt(f, w);

  nn::MatX<S> margin = nn::MatX<S>::Zero(b, k);
  std::vector<std::pair<int, int>> picks;
  picks.reserve(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k) throw std::invalid_argument("lmcl_loss: label out of range");
    margin(i, y) = cfg.margin;
    picks.emplace_back(i, y);
  }
  auto logits = nn::scale(nn::sub(cosines, nn::constant<S>(std::move(margin))), cfg.scale);
  auto logp = nn::row_log_softmax(logits);
  return nn::scale(nn::mean_all(nn::select_items(logp, std::move(picks))), S(-1));
}

// Mean hinge max(d(a,p) - d(a,n) + margin, 0) over row-aligned triplets.
template <typename S>
nn::TensorPtrT<S> triplet_loss(nn::TensorPtrT<S> anchor, nn::TensorPtrT<S> positive,
                               nn::TensorPtrT<S> negative, const TripletConfigT<S>& cfg) {
  if (!(cfg.margin > S(0))) throw std::invalid_argument("triplet_loss: margin must be > 0");
  nn::check_same_shape(anchor, positive, "triplet_loss");
  nn::check_same_shape(anchor, negative, "triplet_loss");
  if (anchor->rows() == 0) throw std::invalid_argument("triplet_loss: empty batch");
  auto d_ap = detail::row_distance(anchor, positive, cfg.distance);
  auto d_an = detail::row_distance(anchor, negative, cfg.distance);
  auto hinge = nn::relu(nn::add_scalar(nn::sub(d_ap, d_an), cfg.margin));
  return nn::mean_all(hinge);
}

// Batch-hard mining: per anchor with at least one same-label partner, the
// positive is the farthest same-label row and the negative the nearest
// other-label row; ties break toward the lowest index. Random mode draws
// both uniformly. Returns an empty list when no anchor qualifies.
template <typename S>
std::vector<Triplet> mine_triplets(const nn::MatX<S>& features, const std::vector<int>& labels,
                                   const TripletConfigT<S>& cfg, util::Rng* rng = nullptr) {
  const int b = static_cast<int>(features.rows());
  if (static_cast<int>(labels.size()) != b) {
    throw std::invalid_argument("mine_triplets: labels size mismatch");
  }
  if (cfg.mining == TripletMining::kRandom && rng == nullptr) {
    throw std::invalid_argument("mine_triplets: random mining needs an rng");
  }
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(features.cols()));
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<double>(features(i, j));
    }
  }
  std::vector<Triplet> out;
  for (int a = 0; a < b; ++a) {
    std::vector<int> positives;
    std::vector<int> negatives;
    for (int j = 0; j < b; ++j) {
      if (j == a) continue;
      (labels[j] == labels[a] ? positives : negatives).push_back(j);
    }
    if (positives.empty() || negatives.empty()) continue;
    if (cfg.mining == TripletMining::kRandom) {
      const int p = positives[static_cast<std::size_t>(
          rng->uniform_int(0, static_cast<int>(positives.size()) - 1))];
      const int n = negatives[static_cast<std::size_t>(
          rng->uniform_int(0, static_cast<int>(negatives.size()) - 1))];
      out.push_back({a, p, n});
      continue;
    }
    int best_p = positives.front();
    double best_p_dist = -1.0;
    for (int p : positives) {
      const double d = detail::plain_distance(rows[a], rows[p], cfg.distance);
      if (d > best_p_dist) {
        best_p_dist = d;
        best_p = p;
      }
    }
    int best_n = negatives.front();
    double best_n_dist = std::numeric_limits<double>::infinity();
    for (int n : negatives) {
      const double d = detail::plain_distance(rows[a], rows[n], cfg.distance);
      if (d < best_n_dist) {
        best_n_dist = d;
        best_n = n;
      }
    }
    out.push_back({a, best_p, best_n});
  }
  return out;
}

// Stage-2 objective: classification + large-margin + triplet terms. Null
// components (for example an empty mining result) contribute zero.
template <typename S>
nn::TensorPtrT<S> stage2_loss(nn::TensorPtrT<S> ce, nn::TensorPtrT<S> cos,
                              nn::TensorPtrT<S> triplet, S ce_weight = S(1),
                              S cos_weight = S(1), S triplet_weight = S(1)) {
  nn::TensorPtrT<S> total;
  auto accumulate = [&total](nn::TensorPtrT<S> term, S weight) {
    if (!term) return;
    auto scaled = (weight == S(1)) ? term : nn::scale(term, weight);
    total = total ? nn::add(total, scaled) : scaled;
  };
  accumulate(ce, ce_weight);
  accumulate(cos, cos_weight);
  accumulate(triplet, triplet_weight);
  if (!total) {
    nn::MatX<S> zero(1, 1);
    zero.setZero();
    total = nn::constant<S>(std::move(zero));
  }
  return total;
}

}  // namespace progeo::losses
