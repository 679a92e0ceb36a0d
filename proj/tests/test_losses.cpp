#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "progeo/losses/losses.hpp"
#include "testutil.hpp"

using namespace progeo;
using losses::SimilarityContextT;
using nn::MatD;
using testutil::max_rel_error;
using testutil::numeric_gradient;
using testutil::random_matrix;

namespace {

SimilarityContextT<double> raw_ctx(MatD v, MatD t, std::vector<int> labels, double tau = 1.0) {
  SimilarityContextT<double> ctx;
  ctx.visual = nn::constant<double>(std::move(v));
  ctx.text = nn::constant<double>(std::move(t));
  ctx.labels = std::move(labels);
  ctx.tau = tau;
  ctx.normalize = false;
  return ctx;
}

// Independent reference: plain softmax cross entropy over cosine
// similarities, computed with loops rather than the tensor ops.
double cosine_softmax_ce(const MatD& features, const MatD& weights,
                         const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    std::vector<double> logits(static_cast<std::size_t>(weights.rows()));
    for (Eigen::Index k = 0; k < weights.rows(); ++k) {
      logits[static_cast<std::size_t>(k)] =
          features.row(i).dot(weights.row(k)) / (features.row(i).norm() * weights.row(k).norm());
    }
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l);
    total += -std::log(std::exp(logits[static_cast<std::size_t>(labels[i])]) / denom);
  }
  return total / static_cast<double>(features.rows());
}

}  // namespace

TEST_CASE("image-to-text: uniform similarities give ln(B)") {
  MatD v = MatD::Ones(3, 4);
  MatD t = MatD::Ones(3, 4);
  auto ctx = raw_ctx(v, t, {0, 1, 2});
  CHECK(losses::image_to_text_loss(ctx)->scalar() == doctest::Approx(std::log(3.0)));
}

TEST_CASE("image-to-text: single element batch is zero") {
  auto ctx = raw_ctx(MatD::Ones(1, 4), MatD::Ones(1, 4), {0});
  CHECK(losses::image_to_text_loss(ctx)->scalar() == doctest::Approx(0.0));
}

TEST_CASE("image-to-text: frozen two-by-two value") {
  // similarity matrix [[2,0],[0,2]] at tau=1 -> ln(1+e^-2)
  MatD v(2, 2);
  v << 2, 0, 0, 2;
  MatD t = MatD::Identity(2, 2);
  auto ctx = raw_ctx(v, t, {0, 1});
  CHECK(losses::image_to_text_loss(ctx)->scalar() ==
        doctest::Approx(0.1269280110429726).epsilon(1e-9));
}

TEST_CASE("image-to-text: tau must be positive") {
  auto ctx = raw_ctx(MatD::Ones(2, 2), MatD::Ones(2, 2), {0, 1});
  ctx.tau = 0.0;
  CHECK_THROWS_AS(losses::image_to_text_loss(ctx), std::invalid_argument);
}

TEST_CASE("text-to-image: unique labels reduce to transposed image-to-text") {
  util::Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const MatD v = random_matrix<double>(rng, 4, 6);
    const MatD t = random_matrix<double>(rng, 4, 6);
    auto ctx = raw_ctx(v, t, {0, 1, 2, 3}, 0.5);
    ctx.normalize = true;
    auto pos = losses::build_positive_set(ctx.labels);
    const double lti = losses::text_to_image_loss(ctx, pos)->scalar();

    auto transposed = raw_ctx(t, v, {0, 1, 2, 3}, 0.5);
    transposed.normalize = true;
    const double lit = losses::image_to_text_loss(transposed)->scalar();
    CHECK(std::abs(lti - lit) < 1e-6);
  }
}

TEST_CASE("text-to-image: frozen same-label value is ln 2") {
  MatD v(2, 3);
  v << 1, 2, 3, 1, 2, 3;
  MatD t(2, 3);
  t << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5;
  auto ctx = raw_ctx(v, t, {7, 7});
  auto pos = losses::build_positive_set(ctx.labels);
  CHECK(losses::text_to_image_loss(ctx, pos)->scalar() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("text-to-image: single element batch is zero") {
  auto ctx = raw_ctx(MatD::Ones(1, 4), MatD::Ones(1, 4), {3});
  auto pos = losses::build_positive_set(ctx.labels);
  CHECK(losses::text_to_image_loss(ctx, pos)->scalar() == doctest::Approx(0.0));
}

TEST_CASE("text-to-image: inconsistent positive set is an error") {
  auto ctx = raw_ctx(MatD::Ones(2, 4), MatD::Ones(2, 4), {0, 1});
  losses::PositiveSet pos;  // empty
  CHECK_THROWS_AS(losses::text_to_image_loss(ctx, pos), std::invalid_argument);
}

TEST_CASE("stage1 loss is the exact sum of both directions") {
  util::Rng rng(9);
  const MatD v = random_matrix<double>(rng, 5, 4);
  const MatD t = random_matrix<double>(rng, 5, 4);
  auto ctx = raw_ctx(v, t, {0, 1, 0, 2, 1}, 0.25);
  ctx.normalize = true;
  auto pos = losses::build_positive_set(ctx.labels);
  const double total = losses::stage1_loss(ctx, pos)->scalar();
  const double it = losses::image_to_text_loss(ctx)->scalar();
  const double ti = losses::text_to_image_loss(ctx, pos)->scalar();
  CHECK(total == doctest::Approx(it + ti).epsilon(1e-12));

  SUBCASE("symmetric similarity with unique labels doubles one direction") {
    auto sym = raw_ctx(v, v, {0, 1, 2, 3, 4}, 0.5);
    sym.normalize = true;
    auto sym_pos = losses::build_positive_set(sym.labels);
    CHECK(losses::stage1_loss(sym, sym_pos)->scalar() ==
          doctest::Approx(2.0 * losses::image_to_text_loss(sym)->scalar()).epsilon(1e-9));
  }
}

TEST_CASE("smoothed target distribution") {
  losses::SmoothedTarget t{0.1, 4, 2};
  const auto q = t.distribution<double>();
  CHECK(q[0] == doctest::Approx(0.025));
  CHECK(q[1] == doctest::Approx(0.025));
  CHECK(q[2] == doctest::Approx(0.925));
  CHECK(q[3] == doctest::Approx(0.025));
  CHECK(q[0] + q[1] + q[2] + q[3] == doctest::Approx(1.0));

  SUBCASE("strictly positive when eps > 0, sums to one on random shapes") {
    util::Rng rng(33);
    for (int rep = 0; rep < 20; ++rep) {
      const int k = rng.uniform_int(1, 12);
      losses::SmoothedTarget target{rng.uniform(0.0, 0.9), k, rng.uniform_int(0, k - 1)};
      const auto dist = target.distribution<double>();
      double sum = 0.0;
      for (double x : dist) {
        sum += x;
        if (target.epsilon > 0.0) CHECK(x > 0.0);
        CHECK(x >= 0.0);
      }
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("smoothed cross entropy: eps=0 with uniform logits gives ln K") {
  const int k = 5;
  MatD cache = MatD::Ones(k, 3);
  auto visual = nn::constant<double>(MatD::Ones(1, 3));
  const double loss =
      losses::smoothed_cross_entropy<double>(visual, cache, {2}, 0.0, 1.0, false)->scalar();
  CHECK(loss == doctest::Approx(std::log(5.0)));
}

TEST_CASE("smoothed cross entropy: frozen two-class value") {
  // logits [3, 0], y=0, eps=0.1, tau=1 -> 0.95*ln(1+e^-3) + 0.05*ln(1+e^3)
  MatD cache(2, 2);
  cache << 3, 0, 0, 0;
  MatD v(1, 2);
  v << 1, 1;
  auto visual = nn::constant<double>(v);
  const double loss =
      losses::smoothed_cross_entropy<double>(visual, cache, {0}, 0.1, 1.0, false)->scalar();
  CHECK(loss == doctest::Approx(0.19858735157374208).epsilon(1e-9));
}

TEST_CASE("smoothed cross entropy: class-count mismatch is an error") {
  MatD cache = MatD::Ones(3, 4);
  auto visual = nn::constant<double>(MatD::Ones(1, 4));
  CHECK_THROWS_AS(
      losses::smoothed_cross_entropy<double>(visual, cache, {3}, 0.1, 1.0, false),
      std::invalid_argument);
}

TEST_CASE("lmcl: margin-free unit-scale equals cosine softmax CE") {
  util::Rng rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    const MatD f = random_matrix<double>(rng, 6, 5, -1.0, 1.0);
    const MatD w = random_matrix<double>(rng, 4, 5, -1.0, 1.0);
    const std::vector<int> labels = {0, 1, 2, 3, 1, 0};
    losses::LmclConfigT<double> cfg;
    cfg.scale = 1.0;
    cfg.margin = 0.0;
    cfg.weights = nn::constant<double>(w);
    const double got = losses::lmcl_loss(nn::constant<double>(f), labels, cfg)->scalar();
    CHECK(std::abs(got - cosine_softmax_ce(f, w, labels)) < 1e-6);
  }
}

TEST_CASE("lmcl: loss is non-decreasing in the margin") {
  util::Rng rng(25);
  const MatD f = random_matrix<double>(rng, 5, 4);
  const MatD w = random_matrix<double>(rng, 3, 4);
  const std::vector<int> labels = {0, 1, 2, 0, 1};
  double prev = -1.0;
  for (double m : {0.0, 0.1, 0.2, 0.4, 0.8}) {
    losses::LmclConfigT<double> cfg;
    cfg.scale = 10.0;
    cfg.margin = m;
    cfg.weights = nn::constant<double>(w);
    const double loss = losses::lmcl_loss(nn::constant<double>(f), labels, cfg)->scalar();
    CHECK(loss >= prev);
    prev = loss;
  }
}

TEST_CASE("lmcl: frozen two-class value at s=30, m=0.4") {
  // cos(theta) = [1, 0] for the true class at index 0
  MatD f(1, 2);
  f << 1, 0;
  MatD w(2, 2);
  w << 1, 0, 0, 1;
  losses::LmclConfigT<double> cfg;
  cfg.scale = 30.0;
  cfg.margin = 0.4;
  cfg.weights = nn::constant<double>(w);
  const double loss = losses::lmcl_loss(nn::constant<double>(f), {0}, cfg)->scalar();
  CHECK(loss == doctest::Approx(1.522997960583303e-08).epsilon(1e-6));
}

TEST_CASE("lmcl: zero-norm feature is an error") {
  MatD f = MatD::Zero(1, 3);
  losses::LmclConfigT<double> cfg;
  cfg.weights = nn::constant<double>(MatD::Ones(2, 3));
  CHECK_THROWS_AS(losses::lmcl_loss(nn::constant<double>(f), {0}, cfg), std::invalid_argument);
}

TEST_CASE("triplet loss: frozen hinge values") {
  losses::TripletConfigT<double> cfg;
  cfg.margin = 0.5;

  // d(a,p)=1, d(a,n)=2 -> satisfied, 0
  MatD a(1, 2), p(1, 2), n(1, 2);
  a << 0, 0;
  p << 1, 0;
  n << 2, 0;
  CHECK(losses::triplet_loss(nn::constant<double>(a), nn::constant<double>(p),
                             nn::constant<double>(n), cfg)
            ->scalar() == doctest::Approx(0.0));

  // d(a,p)=2, d(a,n)=1 -> 1.5
  p << 2, 0;
  n << 1, 0;
  CHECK(losses::triplet_loss(nn::constant<double>(a), nn::constant<double>(p),
                             nn::constant<double>(n), cfg)
            ->scalar() == doctest::Approx(1.5).epsilon(1e-6));

  // a == p -> max(margin - d(a,n), 0)
  p << 0, 0;
  n << 0.2, 0;
  CHECK(losses::triplet_loss(nn::constant<double>(a), nn::constant<double>(p),
                             nn::constant<double>(n), cfg)
            ->scalar() == doctest::Approx(0.3).epsilon(1e-4));

  SUBCASE("dimension mismatch is an error") {
    MatD bad = MatD::Ones(1, 3);
    CHECK_THROWS_AS(losses::triplet_loss(nn::constant<double>(a), nn::constant<double>(bad),
                                         nn::constant<double>(n), cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("triplet mining: batch-hard picks and edge cases") {
  losses::TripletConfigT<double> cfg;

  SUBCASE("two tight clusters") {
    MatD f(4, 2);
    f << 0, 0, 0, 0, 1, 0, 1, 0;
    const auto trips = losses::mine_triplets<double>(f, {0, 0, 1, 1}, cfg);
    REQUIRE(trips.size() == 4);
    for (const auto& t : trips) {
      CHECK((f.row(t.anchor) - f.row(t.positive)).norm() == doctest::Approx(0.0));
      CHECK((f.row(t.anchor) - f.row(t.negative)).norm() == doctest::Approx(1.0));
    }
  }

  SUBCASE("single class yields empty list") {
    MatD f = MatD::Random(3, 2);
    CHECK(losses::mine_triplets<double>(f, {5, 5, 5}, cfg).empty());
  }

  SUBCASE("line at 0, 1, 10 with labels A A B") {
    MatD f(3, 1);
    f << 0, 1, 10;
    const auto trips = losses::mine_triplets<double>(f, {0, 0, 1}, cfg);
    REQUIRE(trips.size() == 2);
    CHECK(trips[0].anchor == 0);
    CHECK(trips[0].positive == 1);
    CHECK(trips[0].negative == 2);
  }

  SUBCASE("ties break toward the lowest index") {
    MatD f(4, 1);
    f << 0, 1, 1, 1;  // two equally-near negatives at indices 2, 3
    const auto trips = losses::mine_triplets<double>(f, {0, 0, 1, 1}, cfg);
    REQUIRE(!trips.empty());
    CHECK(trips[0].negative == 2);
  }
}

TEST_CASE("stage2 loss composes components and tolerates empty mining") {
  auto scalar = [](double x) {
    MatD m(1, 1);
    m << x;
    return nn::constant<double>(m);
  };
  CHECK(losses::stage2_loss<double>(scalar(0.0), scalar(0.0), scalar(0.0))->scalar() == 0.0);
  CHECK(losses::stage2_loss<double>(scalar(1.5), scalar(0.25), scalar(3.0))->scalar() ==
        doctest::Approx(4.75));
  CHECK(losses::stage2_loss<double>(scalar(1.5), scalar(0.25), nullptr)->scalar() ==
        doctest::Approx(1.75));
  CHECK(losses::stage2_loss<double>(nullptr, nullptr, nullptr)->scalar() == 0.0);
}

TEST_CASE("every loss is non-negative on random inputs") {
  util::Rng rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const int b = rng.uniform_int(2, 6);
    const int d = rng.uniform_int(2, 8);
    const MatD v = random_matrix<double>(rng, b, d);
    const MatD t = random_matrix<double>(rng, b, d);
    std::vector<int> labels(static_cast<std::size_t>(b));
    for (auto& l : labels) l = rng.uniform_int(0, 2);

    SimilarityContextT<double> ctx;
    ctx.visual = nn::constant<double>(v);
    ctx.text = nn::constant<double>(t);
    ctx.labels = labels;
    ctx.tau = 0.07;
    ctx.normalize = true;
    auto pos = losses::build_positive_set(labels);
    CHECK(losses::image_to_text_loss(ctx)->scalar() >= 0.0);
    CHECK(losses::text_to_image_loss(ctx, pos)->scalar() >= 0.0);

    const MatD cache = random_matrix<double>(rng, 3, d);
    CHECK(losses::smoothed_cross_entropy<double>(nn::constant<double>(v), cache, labels, 0.1,
                                                 0.07) ->scalar() >= 0.0);

    losses::LmclConfigT<double> cfg;
    cfg.weights = nn::constant<double>(random_matrix<double>(rng, 3, d));
    CHECK(losses::lmcl_loss(nn::constant<double>(v), labels, cfg)->scalar() >= 0.0);
  }
}

TEST_CASE("temperature rescaling keeps softmax argmax rows") {
  util::Rng rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    const MatD logits = random_matrix<double>(rng, 4, 6, -2.0, 2.0);
    const double c = rng.uniform(0.5, 4.0);
    auto p1 = nn::row_softmax(nn::constant<double>(MatD(logits / 0.07)));
    auto p2 = nn::row_softmax(nn::constant<double>(MatD((logits * c) / (0.07 * c))));
    for (int i = 0; i < 4; ++i) {
      Eigen::Index a1, a2, dummy;
      p1->value.row(i).maxCoeff(&dummy, &a1);
      p2->value.row(i).maxCoeff(&dummy, &a2);
      CHECK(a1 == a2);
    }
  }
}

// ---- the gradient suite (finite differences against the analytic path) ----

TEST_CASE("gradients: image-to-text and text-to-image") {
  util::Rng rng(51);
  for (int rep = 0; rep < 10; ++rep) {
    const int b = rng.uniform_int(2, 5);
    const int d = rng.uniform_int(3, 6);
    const MatD v0 = random_matrix<double>(rng, b, d);
    const MatD t0 = random_matrix<double>(rng, b, d);
    std::vector<int> labels(static_cast<std::size_t>(b));
    for (auto& l : labels) l = rng.uniform_int(0, 1);
    const auto pos = losses::build_positive_set(labels);

    auto eval_it = [&](const MatD& vm, const MatD& tm) {
      SimilarityContextT<double> ctx;
      ctx.visual = nn::parameter<double>(vm);
      ctx.text = nn::parameter<double>(tm);
      ctx.labels = labels;
      ctx.tau = 0.2;
      ctx.normalize = true;
      return ctx;
    };

    {
      auto ctx = eval_it(v0, t0);
      auto loss = losses::image_to_text_loss(ctx);
      nn::backward(loss);
      const MatD num_v = numeric_gradient(
          [&](const MatD& m) { return losses::image_to_text_loss(eval_it(m, t0)).get()->scalar(); },
          v0);
      const MatD num_t = numeric_gradient(
          [&](const MatD& m) { return losses::image_to_text_loss(eval_it(v0, m)).get()->scalar(); },
          t0);
      CHECK(max_rel_error(ctx.visual->grad, num_v) < 1e-3);
      CHECK(max_rel_error(ctx.text->grad, num_t) < 1e-3);
    }
    {
      auto ctx = eval_it(v0, t0);
      auto loss = losses::text_to_image_loss(ctx, pos);
      nn::backward(loss);
      const MatD num_v = numeric_gradient(
          [&](const MatD& m) {
            return losses::text_to_image_loss(eval_it(m, t0), pos).get()->scalar();
          },
          v0);
      CHECK(max_rel_error(ctx.visual->grad, num_v) < 1e-3);
    }
  }
}

TEST_CASE("gradients: smoothed cross entropy, lmcl, triplet") {
  util::Rng rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    const int b = rng.uniform_int(2, 5);
    const int d = rng.uniform_int(3, 6);
    const int k = rng.uniform_int(2, 4);
    std::vector<int> labels(static_cast<std::size_t>(b));
    for (auto& l : labels) l = rng.uniform_int(0, k - 1);
    const MatD v0 = random_matrix<double>(rng, b, d);
    const MatD cache = random_matrix<double>(rng, k, d);

    {
      auto v = nn::parameter<double>(v0);
      auto loss = losses::smoothed_cross_entropy<double>(v, cache, labels, 0.1, 0.2);
      nn::backward(loss);
      const MatD num = numeric_gradient(
          [&](const MatD& m) {
            return losses::smoothed_cross_entropy<double>(nn::parameter<double>(m), cache, labels,
                                                          0.1, 0.2)
                ->scalar();
          },
          v0);
      CHECK(max_rel_error(v->grad, num) < 1e-3);
    }
    {
      const MatD w0 = random_matrix<double>(rng, k, d);
      auto make_cfg = [&](nn::TensorPtrT<double> w) {
        losses::LmclConfigT<double> cfg;
        cfg.scale = 30.0;
        cfg.margin = 0.4;
        cfg.weights = std::move(w);
        return cfg;
      };
      auto f = nn::parameter<double>(v0);
      auto w = nn::parameter<double>(w0);
      auto loss = losses::lmcl_loss(f, labels, make_cfg(w));
      nn::backward(loss);
      const MatD num_f = numeric_gradient(
          [&](const MatD& m) {
            return losses::lmcl_loss(nn::parameter<double>(m), labels,
                                     make_cfg(nn::parameter<double>(w0)))
                ->scalar();
          },
          v0);
      const MatD num_w = numeric_gradient(
          [&](const MatD& m) {
            return losses::lmcl_loss(nn::parameter<double>(v0), labels,
                                     make_cfg(nn::parameter<double>(m)))
                ->scalar();
          },
          w0);
      CHECK(max_rel_error(f->grad, num_f) < 1e-3);
      CHECK(max_rel_error(w->grad, num_w) < 1e-3);
    }
    {
      losses::TripletConfigT<double> cfg;
      cfg.margin = 0.5;
      cfg.distance = (rep % 2 == 0) ? losses::TripletDistance::kEuclidean
                                    : losses::TripletDistance::kCosine;
      const MatD a0 = random_matrix<double>(rng, b, d);
      const MatD p0 = random_matrix<double>(rng, b, d);
      const MatD n0 = random_matrix<double>(rng, b, d);
      auto a = nn::parameter<double>(a0);
      auto loss = losses::triplet_loss(a, nn::constant<double>(p0), nn::constant<double>(n0), cfg);
      nn::backward(loss);
      const MatD num = numeric_gradient(
          [&](const MatD& m) {
            return losses::triplet_loss(nn::parameter<double>(m), nn::constant<double>(p0),
                                        nn::constant<double>(n0), cfg)
                ->scalar();
          },
          a0);
      CHECK(max_rel_error(a->grad, num) < 1e-3);
    }
  }
}
