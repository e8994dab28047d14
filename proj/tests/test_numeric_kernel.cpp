#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "hgnas/grad_tape.hpp"
#include "hgnas/tensor.hpp"

using namespace hgnas;
using hgnas::testing::FdCheck;

TEST_CASE("matmul basics") {
  Tensor2 eye = Tensor2::identity(2);
  Tensor2 x(2, 3, {1, 2, 3, 4, 5, 6});
  Tensor2 out = matmul(eye, x);
  CHECK(max_abs_diff(out, x) == 0.0);

  Tensor2 a(2, 2, {1, 2, 3, 4});
  Tensor2 b(2, 1, {1, 1});
  Tensor2 c = matmul(a, b);
  CHECK(c(0, 0) == 3.0);
  CHECK(c(1, 0) == 7.0);

  CHECK_THROWS_AS(matmul(a, x.rows == 2 ? Tensor2(3, 1) : x), std::invalid_argument);
}

TEST_CASE("matmul gradient vs central differences") {
  Rng rng = make_rng(11);
  FdCheck check;
  check.params = {Tensor2::randn(3, 4, rng), Tensor2::randn(4, 2, rng)};
  Tensor2 weights = Tensor2::randn(3, 2, rng);
  check.build = [&](const std::vector<Tensor2>& p, std::vector<Tensor2>* grads) {
    GradTape tape;
    auto a = tape.leaf(p[0]);
    auto b = tape.leaf(p[1]);
    auto loss = tape.weighted_sum(tape.matmul(a, b), weights);
    double value = tape.value(loss)(0, 0);
    if (grads) {
      tape.backward(loss);
      *grads = {tape.grad(a), tape.grad(b)};
    }
    return value;
  };
  CHECK(check.run() <= 1e-6);
}

TEST_CASE("segment_reduce examples") {
  GradTape tape;
  auto msgs = tape.leaf(Tensor2(2, 1, {1, 3}));
  std::vector<int> targets = {0, 0};
  CHECK(tape.value(tape.segment_reduce(msgs, targets, 1, Reducer::Sum))(0, 0) == 4.0);
  CHECK(tape.value(tape.segment_reduce(msgs, targets, 1, Reducer::Mean))(0, 0) == 2.0);
  CHECK(tape.value(tape.segment_reduce(msgs, targets, 1, Reducer::Max))(0, 0) == 3.0);
  CHECK(tape.value(tape.segment_reduce(msgs, targets, 1, Reducer::Min))(0, 0) == 1.0);

  // empty segment 1 yields a zero row
  auto out = tape.segment_reduce(msgs, {0, 0}, 2, Reducer::Max);
  CHECK(tape.value(out)(1, 0) == 0.0);

  CHECK_THROWS_AS(tape.segment_reduce(msgs, {0, 5}, 2, Reducer::Sum), std::out_of_range);
}

TEST_CASE("segment max gradient routes to the argmax row only") {
  GradTape tape;
  auto msgs = tape.leaf(Tensor2(3, 1, {1, 5, 2}));
  auto out = tape.segment_reduce(msgs, {0, 0, 0}, 1, Reducer::Max);
  auto loss = tape.weighted_sum(out, Tensor2(1, 1, {1}));
  tape.backward(loss);
  const Tensor2& g = tape.grad(msgs);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(1, 0) == 1.0);
  CHECK(g(2, 0) == 0.0);
}

TEST_CASE("segment min/max tie gradient goes to the first occurrence") {
  GradTape tape;
  auto msgs = tape.leaf(Tensor2(3, 1, {5, 5, 1}));
  auto out = tape.segment_reduce(msgs, {0, 0, 0}, 1, Reducer::Max);
  auto loss = tape.weighted_sum(out, Tensor2(1, 1, {1}));
  tape.backward(loss);
  CHECK(tape.grad(msgs)(0, 0) == 1.0);
  CHECK(tape.grad(msgs)(1, 0) == 0.0);
}

TEST_CASE("segment_reduce gradients vs central differences") {
  Rng rng = make_rng(7);
  for (Reducer reducer : {Reducer::Sum, Reducer::Mean, Reducer::Max, Reducer::Min}) {
    FdCheck check;
    check.params = {Tensor2::randn(6, 3, rng)};
    std::vector<int> targets = {0, 1, 1, 2, 0, 2};
    Tensor2 weights = Tensor2::randn(3, 3, rng);
    check.build = [&](const std::vector<Tensor2>& p, std::vector<Tensor2>* grads) {
      GradTape tape;
      auto m = tape.leaf(p[0]);
      auto loss = tape.weighted_sum(tape.segment_reduce(m, targets, 3, reducer), weights);
      double v = tape.value(loss)(0, 0);
      if (grads) {
        tape.backward(loss);
        *grads = {tape.grad(m)};
      }
      return v;
    };
    CHECK(check.run() <= 1e-6);
  }
}

TEST_CASE("segment sum equals incidence-matrix matmul") {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    int rows = 1 + static_cast<int>(rng() % 32);
    int segments = 1 + static_cast<int>(rng() % 6);
    int cols = 1 + static_cast<int>(rng() % 4);
    Tensor2 msgs = Tensor2::randn(rows, cols, rng);
    std::vector<int> targets(rows);
    Tensor2 incidence(segments, rows);
    for (int r = 0; r < rows; ++r) {
      targets[r] = static_cast<int>(rng() % segments);
      incidence(targets[r], r) = 1.0;
    }
    GradTape tape;
    auto m = tape.leaf(msgs);
    Tensor2 via_segments = tape.value(tape.segment_reduce(m, targets, segments, Reducer::Sum));
    Tensor2 via_matmul = matmul(incidence, msgs);
    CHECK(max_abs_diff(via_segments, via_matmul) <= 1e-12);
  }
}

TEST_CASE("pointwise activations") {
  GradTape tape;
  auto x = tape.leaf(Tensor2(1, 2, {-1, 2}));
  Tensor2 y = tape.value(tape.leaky_relu(x, 0.01));
  CHECK(y(0, 0) == doctest::Approx(-0.01));
  CHECK(y(0, 1) == 2.0);

  // relu(x) == leaky_relu(0)(x) elementwise
  Rng rng = make_rng(3);
  Tensor2 r = Tensor2::randn(4, 5, rng);
  GradTape t2;
  auto xr = t2.leaf(r);
  CHECK(max_abs_diff(t2.value(t2.relu(xr)), t2.value(t2.leaky_relu(xr, 0.0))) == 0.0);
}

TEST_CASE("activation gradient away from zero") {
  Rng rng = make_rng(5);
  FdCheck check;
  Tensor2 x = Tensor2::randn(4, 3, rng);
  for (auto& v : x.data) v += v >= 0 ? 0.5 : -0.5;  // keep clear of the kink
  check.params = {x};
  Tensor2 weights = Tensor2::randn(4, 3, rng);
  check.build = [&](const std::vector<Tensor2>& p, std::vector<Tensor2>* grads) {
    GradTape tape;
    auto xx = tape.leaf(p[0]);
    auto loss = tape.weighted_sum(tape.leaky_relu(xx, 0.2), weights);
    double v = tape.value(loss)(0, 0);
    if (grads) {
      tape.backward(loss);
      *grads = {tape.grad(xx)};
    }
    return v;
  };
  CHECK(check.run() <= 1e-6);
}

TEST_CASE("composite ops gradients (gather, concat, mask, norm, broadcast)") {
  Rng rng = make_rng(17);
  FdCheck check;
  check.params = {Tensor2::randn(5, 4, rng), Tensor2::randn(1, 4, rng)};
  std::vector<int> gather_ids = {0, 2, 2, 4, 1, 3};
  Tensor2 weights = Tensor2::randn(6, 9, rng);
  check.build = [&](const std::vector<Tensor2>& p, std::vector<Tensor2>* grads) {
    GradTape tape;
    auto x = tape.leaf(p[0]);
    auto bias = tape.leaf(p[1]);
    auto shifted = tape.add_row_broadcast(x, bias);
    auto gathered = tape.gather_rows(shifted, gather_ids);
    auto masked = tape.mask_columns(gathered, 3);
    auto norm = tape.row_l2_norm(gathered);
    auto cat = tape.concat_cols(tape.concat_cols(gathered, masked), norm);
    auto loss = tape.weighted_sum(cat, weights);
    double v = tape.value(loss)(0, 0);
    if (grads) {
      tape.backward(loss);
      *grads = {tape.grad(x), tape.grad(bias)};
    }
    return v;
  };
  CHECK(check.run() <= 1e-5);
}

TEST_CASE("softmax cross entropy") {
  // uniform logits over C classes give ln C
  for (int c : {2, 4, 7}) {
    Tensor2 logits(3, c);
    CHECK(softmax_cross_entropy_value(logits, {0, 1, c - 1}) ==
          doctest::Approx(std::log(static_cast<double>(c))));
  }

  Rng rng = make_rng(29);
  FdCheck check;
  check.params = {Tensor2::randn(5, 4, rng)};
  std::vector<int> labels = {0, 3, 1, 2, 2};
  check.build = [&](const std::vector<Tensor2>& p, std::vector<Tensor2>* grads) {
    GradTape tape;
    auto logits = tape.leaf(p[0]);
    auto loss = tape.softmax_cross_entropy(logits, labels);
    double v = tape.value(loss)(0, 0);
    if (grads) {
      tape.backward(loss);
      *grads = {tape.grad(logits)};
    }
    return v;
  };
  CHECK(check.run() <= 1e-6);
}

TEST_CASE("mape") {
  GradTape tape;
  auto pred = tape.leaf(Tensor2(2, 1, {1, 2}));
  CHECK(tape.value(tape.mape(pred, Tensor2(2, 1, {1, 2})))(0, 0) == 0.0);

  GradTape t2;
  auto p2 = t2.leaf(Tensor2(1, 1, {2}));
  CHECK(t2.value(t2.mape(p2, Tensor2(1, 1, {1})))(0, 0) == 1.0);

  GradTape t3;
  auto p3 = t3.leaf(Tensor2(1, 1, {2}));
  CHECK_THROWS_AS(t3.mape(p3, Tensor2(1, 1, {0})), std::invalid_argument);

  Rng rng = make_rng(31);
  FdCheck check;
  Tensor2 truth(4, 1, {1.0, 2.5, 0.5, 3.0});
  check.params = {Tensor2(4, 1, {1.7, 1.1, 0.9, 4.2})};  // away from pred == truth
  check.build = [&](const std::vector<Tensor2>& p, std::vector<Tensor2>* grads) {
    GradTape tape2;
    auto pr = tape2.leaf(p[0]);
    auto loss = tape2.mape(pr, truth);
    double v = tape2.value(loss)(0, 0);
    if (grads) {
      tape2.backward(loss);
      *grads = {tape2.grad(pr)};
    }
    return v;
  };
  CHECK(check.run() <= 1e-6);
}

TEST_CASE("kernels are deterministic") {
  auto run = [] {
    Rng rng = make_rng(99);
    Tensor2 a = Tensor2::randn(6, 6, rng);
    Tensor2 b = Tensor2::randn(6, 6, rng);
    GradTape tape;
    auto loss = tape.weighted_sum(tape.matmul(tape.leaf(a), tape.leaf(b)),
                                  Tensor2::full(6, 6, 0.5));
    tape.backward(loss);
    return tape.value(loss)(0, 0);
  };
  CHECK(run() == run());
}

TEST_CASE("sgd with momentum") {
  Tensor2 p(1, 1, {1.0});
  Tensor2 g(1, 1, {0.5});
  SgdOptimizer opt(0.1, 0.9);
  opt.step({&p}, {&g});
  CHECK(p(0, 0) == doctest::Approx(1.0 - 0.1 * 0.5));
  opt.step({&p}, {&g});
  // velocity = 0.9*0.5 + 0.5 = 0.95
  CHECK(p(0, 0) == doctest::Approx(0.95 - 0.1 * 0.95));
}
