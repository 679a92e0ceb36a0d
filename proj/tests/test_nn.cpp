#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "progeo/nn/adam.hpp"
#include "progeo/nn/init.hpp"
#include "progeo/nn/ops.hpp"
#include "progeo/nn/tensor.hpp"
#include "testutil.hpp"

using namespace progeo;
using nn::MatD;
using testutil::max_rel_error;
using testutil::numeric_gradient;
using testutil::random_matrix;

namespace {

// Runs fd-vs-analytic on a graph builder taking a single differentiable input.
double gradcheck(const std::function<nn::TensorPtrT<double>(nn::TensorPtrT<double>)>& build,
                 const MatD& x0) {
  auto x = nn::parameter<double>(x0);
  auto out = build(x);
  nn::backward(out);
  const MatD analytic = x->grad;
  const MatD numeric = numeric_gradient(
      [&](const MatD& probe) {
        auto xp = nn::parameter<double>(probe);
        return nn::sum_all(build(xp))->scalar();
      },
      x0);
  return max_rel_error(analytic, numeric);
}

}  // namespace

TEST_CASE("matmul forward and gradient") {
  util::Rng rng(7);
  const MatD a0 = random_matrix<double>(rng, 3, 4);
  const MatD b0 = random_matrix<double>(rng, 4, 2);
  CHECK(gradcheck([&](auto x) { return nn::matmul(x, nn::constant<double>(b0)); }, a0) < 1e-6);
  CHECK(gradcheck([&](auto x) { return nn::matmul(nn::constant<double>(a0), x); }, b0) < 1e-6);
  CHECK(gradcheck([&](auto x) { return nn::matmul_nt(x, nn::constant<double>(b0.transpose())); },
                  a0) < 1e-6);
}

TEST_CASE("elementwise op gradients") {
  util::Rng rng(11);
  const MatD x0 = random_matrix<double>(rng, 4, 5);
  CHECK(gradcheck([](auto x) { return nn::relu(x); }, x0) < 1e-6);
  CHECK(gradcheck([](auto x) { return nn::gelu(x); }, x0) < 1e-6);
  CHECK(gradcheck([](auto x) { return nn::hadamard(x, x); }, x0) < 1e-6);
  CHECK(gradcheck([](auto x) { return nn::scale(nn::add_scalar(x, 0.3), -2.0); }, x0) < 1e-6);
  const MatD pos = random_matrix<double>(rng, 3, 3, 0.5, 2.0);
  CHECK(gradcheck([](auto x) { return nn::sqrt_shifted(x, 1e-12); }, pos) < 1e-6);
}

TEST_CASE("softmax and log-softmax gradients") {
  util::Rng rng(13);
  const MatD x0 = random_matrix<double>(rng, 3, 6, -3.0, 3.0);
  const MatD w = random_matrix<double>(rng, 3, 6);
  CHECK(gradcheck([&](auto x) { return nn::weighted_sum(nn::row_softmax(x), w); }, x0) < 1e-6);
  CHECK(gradcheck([&](auto x) { return nn::weighted_sum(nn::row_log_softmax(x), w); }, x0) < 1e-6);

  auto sm = nn::row_softmax(nn::constant<double>(x0));
  for (int i = 0; i < 3; ++i) {
    CHECK(sm->value.row(i).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("layer norm matches moments and gradients") {
  util::Rng rng(17);
  const MatD x0 = random_matrix<double>(rng, 4, 8);
  const MatD g0 = random_matrix<double>(rng, 1, 8, 0.5, 1.5);
  const MatD b0 = random_matrix<double>(rng, 1, 8);
  const MatD w = random_matrix<double>(rng, 4, 8);

  auto y = nn::layer_norm(nn::constant<double>(x0), nn::constant<double>(g0),
                          nn::constant<double>(b0));
  const MatD normalized =
      (y->value.array().rowwise() - b0.row(0).array()).rowwise() / g0.row(0).array();
  for (int i = 0; i < 4; ++i) {
    CHECK(normalized.row(i).mean() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(normalized.row(i).array().square().mean() == doctest::Approx(1.0).epsilon(1e-3));
  }

  auto build_x = [&](auto x) {
    return nn::weighted_sum(
        nn::layer_norm(x, nn::constant<double>(g0), nn::constant<double>(b0)), w);
  };
  CHECK(gradcheck(build_x, x0) < 1e-5);
  auto build_g = [&](auto g) {
    return nn::weighted_sum(
        nn::layer_norm(nn::constant<double>(x0), g, nn::constant<double>(b0)), w);
  };
  CHECK(gradcheck(build_g, g0) < 1e-6);
}

TEST_CASE("l2 row normalization") {
  util::Rng rng(19);
  const MatD x0 = random_matrix<double>(rng, 3, 5, 0.2, 1.0);
  const MatD w = random_matrix<double>(rng, 3, 5);
  auto y = nn::l2_normalize_rows(nn::constant<double>(x0));
  for (int i = 0; i < 3; ++i) {
    CHECK(y->value.row(i).norm() == doctest::Approx(1.0));
  }
  CHECK(gradcheck([&](auto x) { return nn::weighted_sum(nn::l2_normalize_rows(x), w); }, x0) <
        1e-5);

  nn::MatX<double> zero = nn::MatX<double>::Zero(2, 3);
  CHECK_THROWS_AS(nn::l2_normalize_rows(nn::constant<double>(zero)), std::invalid_argument);
}

TEST_CASE("slicing, gather and concat gradients") {
  util::Rng rng(23);
  const MatD x0 = random_matrix<double>(rng, 5, 4);
  CHECK(gradcheck([](auto x) { return nn::rows(x, 1, 3); }, x0) < 1e-8);
  CHECK(gradcheck([](auto x) { return nn::cols(x, 2, 2); }, x0) < 1e-8);
  // duplicate gather indices must accumulate
  CHECK(gradcheck([](auto x) { return nn::gather_rows(x, {0, 2, 2, 4}); }, x0) < 1e-8);
  CHECK(gradcheck(
            [](auto x) {
              return nn::concat_rows<double>({nn::rows(x, 0, 2), nn::rows(x, 3, 2)});
            },
            x0) < 1e-8);
  CHECK(gradcheck(
            [](auto x) {
              return nn::concat_cols<double>({nn::cols(x, 0, 1), nn::cols(x, 1, 3)});
            },
            x0) < 1e-8);
  CHECK_THROWS_AS(nn::gather_rows(nn::constant<double>(x0), {9}), std::out_of_range);
}

TEST_CASE("reductions") {
  util::Rng rng(29);
  const MatD x0 = random_matrix<double>(rng, 4, 3);
  CHECK(gradcheck([](auto x) { return nn::mean_all(x); }, x0) < 1e-8);
  CHECK(gradcheck([](auto x) { return nn::row_sum(x); }, x0) < 1e-8);
  CHECK(gradcheck([](auto x) { return nn::col_mean(x); }, x0) < 1e-8);
  const MatD picked = random_matrix<double>(rng, 4, 4);
  CHECK(gradcheck([](auto x) { return nn::select_items(x, {{0, 0}, {2, 1}, {2, 1}}); }, picked) <
        1e-8);
}

TEST_CASE("im2col reproduces a direct 3x3 convolution") {
  util::Rng rng(31);
  const int h = 5, w = 5, cin = 2, cout = 3;
  const MatD x0 = random_matrix<double>(rng, h * w, cin);
  const MatD kernel = random_matrix<double>(rng, 9 * cin, cout);
  nn::ConvGeom geom{h, w, cin, 3, 1, 1};

  auto out = nn::matmul(nn::im2col(nn::constant<double>(x0), geom), nn::constant<double>(kernel));
  REQUIRE(out->rows() == h * w);
  REQUIRE(out->cols() == cout);

  // direct nested-loop convolution as the oracle
  for (int oy = 0; oy < h; ++oy) {
    for (int ox = 0; ox < w; ++ox) {
      for (int oc = 0; oc < cout; ++oc) {
        double acc = 0.0;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const int iy = oy - 1 + ky;
            const int ix = ox - 1 + kx;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            for (int ic = 0; ic < cin; ++ic) {
              acc += x0(iy * w + ix, ic) * kernel((ky * 3 + kx) * cin + ic, oc);
            }
          }
        }
        CHECK(out->value(oy * w + ox, oc) == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }

  CHECK(gradcheck([&](auto x) { return nn::matmul(nn::im2col(x, geom), nn::constant<double>(kernel)); },
                  x0) < 1e-6);

  // strided geometry
  nn::ConvGeom strided{h, w, cin, 3, 2, 1};
  CHECK(strided.out_height() == 3);
  CHECK(gradcheck([&](auto x) { return nn::im2col(x, strided); }, x0) < 1e-8);
}

TEST_CASE("backward accumulates through shared subgraphs") {
  // f(x) = sum(x*x + x*x) -> df/dx = 4x
  MatD x0(2, 2);
  x0 << 1.0, -2.0, 3.0, 0.5;
  auto x = nn::parameter<double>(x0);
  auto sq = nn::hadamard(x, x);
  auto out = nn::sum_all(nn::add(sq, sq));
  nn::backward(out);
  CHECK(x->grad(0, 0) == doctest::Approx(4.0));
  CHECK(x->grad(1, 0) == doctest::Approx(12.0));
}

TEST_CASE("adam converges on a quadratic and skips gradient-free params") {
  MatD x0(1, 2);
  x0 << 5.0, -3.0;
  auto x = nn::parameter<double>(x0);
  auto untouched = nn::parameter<double>(MatD::Ones(1, 1));
  nn::AdamT<double> opt({x, untouched}, 0.1);
  for (int i = 0; i < 400; ++i) {
    opt.zero_grad();
    auto loss = nn::sum_all(nn::hadamard(x, x));
    nn::backward(loss);
    opt.step();
  }
  CHECK(std::abs(x->value(0, 0)) < 1e-2);
  CHECK(std::abs(x->value(0, 1)) < 1e-2);
  CHECK(untouched->value(0, 0) == 1.0);
}

TEST_CASE("cosine schedule endpoints") {
  CHECK(nn::cosine_lr_scale<double>(0, 100) == doctest::Approx(1.0));
  CHECK(nn::cosine_lr_scale<double>(50, 100) == doctest::Approx(0.5));
  CHECK(nn::cosine_lr_scale<double>(100, 100) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("seeded init is independent of registration order") {
  const auto a = nn::normal_init<float>(42, "w1", 3, 3, 0.02);
  const auto b = nn::normal_init<float>(42, "w2", 3, 3, 0.02);
  const auto a2 = nn::normal_init<float>(42, "w1", 3, 3, 0.02);
  CHECK(a == a2);
  CHECK(a != b);
}
