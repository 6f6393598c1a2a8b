#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "deciwatch/autodiff.hpp"
#include "oracle_forward.hpp"

using namespace deciwatch;

namespace {

Array2 mat(int r, int c, std::initializer_list<double> vals) {
  Array2 a(r, c);
  std::copy(vals.begin(), vals.end(), a.data.begin());
  return a;
}

Array2 random_mat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Array2 a(r, c);
  for (double& v : a.data) v = u(rng);
  return a;
}

// finite-difference check of d(sum(f(x)))/dx against backprop
template <typename Fn>
void check_grad_fd(Array2 x, Fn&& fn, double rel = 1e-4, double h = 1e-5) {
  NodePtr leaf = make_leaf(x);
  NodePtr loss = sum_all(fn(leaf));
  backward(loss);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double saved = x.data[i];
    x.data[i] = saved + h;
    const double hi = sum_all(fn(make_leaf(x)))->value.at(0, 0);
    x.data[i] = saved - h;
    const double lo = sum_all(fn(make_leaf(x)))->value.at(0, 0);
    x.data[i] = saved;
    const double fd = (hi - lo) / (2.0 * h);
    INFO("index ", i, " fd=", fd, " bp=", leaf->grad.data[i]);
    CHECK(deciwatch::testing::grad_close(leaf->grad.data[i], fd, rel));
  }
}

}  // namespace

TEST_CASE("matmul forward examples") {
  auto a = make_leaf(mat(2, 2, {1, 0, 0, 1}));
  auto b = make_leaf(mat(2, 2, {3, 4, 5, 6}));
  CHECK(max_abs_diff(matmul(a, b)->value, b->value) == 0.0);

  auto r = matmul(make_leaf(mat(1, 2, {1, 2})), make_leaf(mat(2, 1, {3, 4})));
  CHECK(r->value.at(0, 0) == doctest::Approx(11.0));
}

TEST_CASE("matmul gradient of sum is ones * b^T") {
  std::mt19937_64 rng(7);
  Array2 av = random_mat(3, 4, rng), bv = random_mat(4, 2, rng);
  auto a = make_leaf(av);
  auto b = make_leaf(bv);
  backward(sum_all(matmul(a, b)));
  Array2 ones(3, 2, 1.0);
  CHECK(max_abs_diff(a->grad, matmul(ones, transpose(bv))) < 1e-12);
  check_grad_fd(av, [&](NodePtr x) { return matmul(x, make_constant(bv)); }, 1e-6);
}

TEST_CASE("matmul shape mismatch reports both shapes") {
  try {
    matmul(make_leaf(Array2(2, 3)), make_leaf(Array2(4, 2)));
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x2") != std::string::npos);
  }
}

TEST_CASE("softmax rows") {
  auto s = softmax_rows(make_leaf(mat(1, 2, {0, 0})));
  CHECK(s->value.at(0, 0) == doctest::Approx(0.5));
  auto big = softmax_rows(make_leaf(mat(1, 2, {1000, 1000})));
  CHECK(big->value.at(0, 0) == doctest::Approx(0.5));
  CHECK(std::isfinite(big->value.at(0, 1)));

  auto m = softmax_rows(make_leaf(mat(1, 3, {1, 2, 3})));
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) sum += m->value.at(0, j);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m->value.at(0, 0) < m->value.at(0, 1));
  CHECK(m->value.at(0, 1) < m->value.at(0, 2));
  const double e1 = std::exp(1), e2 = std::exp(2), e3 = std::exp(3);
  CHECK(m->value.at(0, 0) == doctest::Approx(e1 / (e1 + e2 + e3)).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one and lie in (0,1) on random input") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Array2 x = random_mat(4, 6, rng, 10.0);
    auto y = softmax_rows(make_leaf(x));
    for (int i = 0; i < 4; ++i) {
      double s = 0.0;
      for (int j = 0; j < 6; ++j) {
        CHECK(y->value.at(i, j) > 0.0);
        CHECK(y->value.at(i, j) < 1.0);
        s += y->value.at(i, j);
      }
      CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("layer_norm examples") {
  auto g = make_constant(mat(1, 3, {1, 1, 1}));
  auto b = make_constant(mat(1, 3, {0, 0, 0}));
  auto z = layer_norm(make_leaf(mat(1, 3, {4, 4, 4})), g, b, 1e-5);
  for (int j = 0; j < 3; ++j) CHECK(z->value.at(0, j) == doctest::Approx(0.0));

  auto g2 = make_constant(mat(1, 2, {1, 1}));
  auto b2 = make_constant(mat(1, 2, {0, 0}));
  auto y = layer_norm(make_leaf(mat(1, 2, {1, -1})), g2, b2, 1e-12);
  CHECK(y->value.at(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(y->value.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-6));

  std::mt19937_64 rng(3);
  Array2 row = random_mat(1, 16, rng, 2.0);
  auto g3 = make_constant(mat(1, 16, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}));
  Array2 zero(1, 16);
  auto out = layer_norm(make_leaf(row), g3, make_constant(zero), 1e-5);
  double mean = 0.0, var = 0.0;
  for (int j = 0; j < 16; ++j) mean += out->value.at(0, j);
  mean /= 16;
  for (int j = 0; j < 16; ++j) var += out->value.at(0, j) * out->value.at(0, j);
  var /= 16;
  CHECK(std::fabs(mean) < 1e-9);
  CHECK(var > 1.0 - 1e-4);
  CHECK(var <= 1.0);
}

TEST_CASE("conv1d examples") {
  // centered delta kernel reproduces the input
  const int ks = 3, dim = 2;
  Array2 kern(ks * dim, dim);
  kern.at(1 * dim + 0, 0) = 1.0;
  kern.at(1 * dim + 1, 1) = 1.0;
  std::mt19937_64 rng(5);
  Array2 x = random_mat(6, dim, rng);
  auto y = conv1d_temporal(make_leaf(x), make_constant(kern), ks);
  CHECK(max_abs_diff(y->value, x) < 1e-15);

  // averaging kernel keeps interior of a constant input
  Array2 avg(3 * 1, 1);
  for (int o = 0; o < 3; ++o) avg.at(o, 0) = 1.0 / 3.0;
  Array2 c(5, 1, 2.0);
  auto yc = conv1d_temporal(make_leaf(c), make_constant(avg), 3);
  for (int t = 1; t < 4; ++t) CHECK(yc->value.at(t, 0) == doctest::Approx(2.0));
  // boundary sees zero padding
  CHECK(yc->value.at(0, 0) == doctest::Approx(4.0 / 3.0));

  // length-7 ramp, kernel 5 of ones: hand convolution with zero padding
  Array2 ones5(5 * 1, 1, 1.0);
  Array2 ramp(7, 1);
  for (int t = 0; t < 7; ++t) ramp.at(t, 0) = t;
  auto yr = conv1d_temporal(make_leaf(ramp), make_constant(ones5), 5);
  CHECK(yr->value.at(0, 0) == doctest::Approx(0 + 1 + 2));
  CHECK(yr->value.at(3, 0) == doctest::Approx(1 + 2 + 3 + 4 + 5));
  CHECK(yr->value.at(6, 0) == doctest::Approx(4 + 5 + 6));

  CHECK_THROWS_AS(conv1d_temporal(make_leaf(ramp), make_constant(ones5), 4),
                  std::invalid_argument);
}

TEST_CASE("backward basics") {
  std::mt19937_64 rng(9);
  Array2 wv = random_mat(3, 3, rng);
  auto w = make_leaf(wv);
  backward(sum_all(w));
  for (double g : w->grad.data) CHECK(g == doctest::Approx(1.0));

  // loss = ||W||^2 -> grad = 2W
  auto wsq = make_leaf(wv);
  backward(sum_all(square(wsq)));
  CHECK(max_abs_diff(wsq->grad, scale(wv, 2.0)) < 1e-12);

  auto w3 = make_leaf(wv);
  NodePtr l = l1_mean(w3, Array2(3, 3));  // mean |W|
  backward(l);
  for (std::size_t i = 0; i < wv.data.size(); ++i)
    CHECK(w3->grad.data[i] == doctest::Approx((wv.data[i] > 0 ? 1.0 : -1.0) / 9.0));

  CHECK_THROWS_AS(backward(make_leaf(Array2(2, 2))), std::invalid_argument);

  // repeated backward accumulates
  auto w4 = make_leaf(wv);
  auto s = sum_all(w4);
  backward(s);
  backward(s);
  for (double g : w4->grad.data) CHECK(g == doctest::Approx(2.0));
}

TEST_CASE("finite differences agree with backprop across ops") {
  std::mt19937_64 rng(1234);
  for (int seed = 0; seed < 100; ++seed) {
    Array2 x = random_mat(3, 4, rng);
    Array2 w = random_mat(4, 4, rng);
    Array2 g = random_mat(1, 4, rng, 0.5);
    Array2 b = random_mat(1, 4, rng, 0.5);
    for (double& v : g.data) v += 1.5;  // keep gains away from zero
    const int pick = seed % 5;
    switch (pick) {
      case 0:
        check_grad_fd(x, [&](NodePtr n) { return matmul(n, make_constant(w)); }, 1e-5);
        break;
      case 1:
        check_grad_fd(x, [&](NodePtr n) { return softmax_rows(n); });
        break;
      case 2:
        check_grad_fd(x, [&](NodePtr n) {
          return layer_norm(n, make_constant(g), make_constant(b), 1e-5);
        });
        break;
      case 3:
        check_grad_fd(x, [&](NodePtr n) { return relu(add(n, make_constant(Array2(3, 4, 0.1)))); });
        break;
      case 4: {
        Array2 kern = random_mat(3 * 4, 4, rng, 0.5);
        check_grad_fd(x, [&](NodePtr n) {
          return conv1d_temporal(n, make_constant(kern), 3);
        });
        break;
      }
    }
  }
}

TEST_CASE("matmul associativity on well-conditioned inputs") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 5; ++t) {
    Array2 a = random_mat(5, 5, rng), b = random_mat(5, 5, rng), c = random_mat(5, 5, rng);
    Array2 l = matmul(matmul(a, b), c);
    Array2 r = matmul(a, matmul(b, c));
    CHECK(max_abs_diff(l, r) < 1e-9);
  }
}

TEST_CASE("graph evaluation is deterministic") {
  std::mt19937_64 rng1(42), rng2(42);
  Array2 x1 = random_mat(4, 4, rng1), x2 = random_mat(4, 4, rng2);
  auto y1 = softmax_rows(matmul(make_leaf(x1), make_leaf(x1)));
  auto y2 = softmax_rows(matmul(make_leaf(x2), make_leaf(x2)));
  CHECK(max_abs_diff(y1->value, y2->value) == 0.0);
}
