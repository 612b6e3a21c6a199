#include <doctest.h>

#include <cmath>
#include <random>

#include "gef/optim.hpp"
#include "gef/params.hpp"
#include "gef/tensor.hpp"
#include "op_catalog.hpp"

using namespace gef;
using gef::testing::grad_check;

TEST_CASE("every op passes central finite differences at three random points") {
  for (const auto& op : gef::testing::op_catalog()) {
    for (std::uint64_t point = 0; point < 3; ++point) {
      std::mt19937_64 rng(1000 + point);
      auto [inputs, loss] = op.make(rng);
      const auto r = grad_check(loss, inputs, 1e-3);
      INFO(op.name << " point " << point);
      CHECK(r.entries > 0);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("shape invariants") {
  CHECK_THROWS_AS(Tensor::from({2, 3}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor::zeros({2, 0}), DimensionError);
  const Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.at(1, 2) == 6);
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(matmul(t, t), DimensionError);
  CHECK_THROWS_AS(add(t, Tensor::zeros({3, 2})), DimensionError);
}

TEST_CASE("non-finite values raise") {
  CHECK(finite_checks_enabled());
  CHECK_THROWS_AS(Tensor::from({1, 2}, {1.0, NAN}), NumericError);
  CHECK_THROWS_AS(exp(Tensor::from({1, 1}, {1000.0})), NumericError);
}

TEST_CASE("matmul agrees with a naive triple loop") {
  std::mt19937_64 rng(5);
  const Tensor a = gef::testing::random_tensor({7, 5}, rng);
  const Tensor b = gef::testing::random_tensor({5, 3}, rng);
  const Tensor c = matmul(a, b);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("leaf gradients accumulate across backward calls") {
  Tensor x = Tensor::from({1, 2}, {1.0, 2.0}, true);
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    tape.backward(sum(mul(x, x)));
  }
  CHECK(x.grad()[0] == 4.0);
  CHECK(x.grad()[1] == 8.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("shared subexpressions sum their gradient contributions") {
  Tensor x = Tensor::from({1, 1}, {3.0}, true);
  Tape tape;
  const Tensor y = tanh(x);
  tape.backward(sum(add(mul(y, y), y)));
  const double t = std::tanh(3.0);
  CHECK(x.grad()[0] == doctest::Approx((2 * t + 1) * (1 - t * t)));
}

TEST_CASE("recording is skipped without a tape, under NoGradGuard and for constants") {
  Tensor x = Tensor::from({1, 1}, {1.0}, true);
  const Tensor c = Tensor::from({1, 1}, {1.0});
  Tape tape;
  (void)tanh(c);
  CHECK(tape.size() == 0);
  {
    NoGradGuard guard;
    (void)tanh(x);
    CHECK(Tape::active() == nullptr);
  }
  CHECK(tape.size() == 0);
  (void)tanh(x);
  CHECK(tape.size() == 1);
}

TEST_CASE("detach copies values and blocks gradient") {
  Tensor x = Tensor::from({1, 3}, {0.5, -1.0, 2.0}, true);
  Tape tape;
  const Tensor d = detach(x);
  CHECK(d.values()[2] == 2.0);
  CHECK_FALSE(d.requires_grad());
  tape.backward(add(sum(mul(x, d)), Tensor::scalar(0.0)));
  // only the undetached factor contributes: d/dx (x * c) = c
  CHECK(x.grad()[0] == 0.5);
  CHECK(x.grad()[1] == -1.0);
}

TEST_CASE("tapes nest and restore the previous tape") {
  Tape outer;
  {
    Tape inner;
    CHECK(Tape::active() == &inner);
  }
  CHECK(Tape::active() == &outer);
}

TEST_CASE("softmax rows normalize and cross entropy is stable for large logits") {
  const Tensor logits = Tensor::from({2, 3}, {1000.0, 0.0, -1000.0, 1.0, 2.0, 3.0});
  const Tensor p = softmax(logits);
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) s += p.at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  const std::vector<int> t{0, 2};
  const Tensor ce = cross_entropy_rows(logits, t);
  CHECK(ce.at(0, 0) == doctest::Approx(0.0));
  CHECK(ce.at(1, 0) == doctest::Approx(-std::log(p.at(1, 2))));
}

TEST_CASE("index errors") {
  const Tensor t = Tensor::zeros({2, 3});
  const std::vector<int> bad{0, 3};
  CHECK_THROWS_AS(pick(t, bad), IndexError);
  const std::vector<int> ids{5};
  CHECK_THROWS_AS(embedding_lookup(t, ids), IndexError);
  CHECK_THROWS(slice_cols(t, 2, 4));
}

TEST_CASE("adam matches a scalar reference update") {
  Tensor w = Tensor::from({1, 1}, {1.0}, true);
  AdamState st = AdamState::for_params(std::span<const Tensor>(&w, 1), 0.1);
  double ref = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 3; ++t) {
    const double g = 2.0 * ref;
    std::vector<std::vector<double>> grads{{g}};
    adam_step(std::span<Tensor>(&w, 1), grads, st);
    m = 0.9 * m + (1.0 - 0.9) * g;
    v = 0.999 * v + (1.0 - 0.999) * g * g;
    ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    CHECK(w.item() == ref);
  }
}

TEST_CASE("adam leaves inactive parameters and their moments untouched") {
  std::vector<Tensor> ws{Tensor::from({1, 1}, {1.0}, true), Tensor::from({1, 1}, {1.0}, true)};
  AdamState st = AdamState::for_params(ws, 0.1);
  std::vector<std::vector<double>> grads{{1.0}, {1.0}};
  adam_step(ws, grads, st, {true, false});
  CHECK(ws[0].item() < 1.0);
  CHECK(ws[1].item() == 1.0);
  CHECK(st.m[1][0] == 0.0);
}

TEST_CASE("parameter digest tracks values") {
  Rng rng(3);
  ParameterList p{{"a", uniform_param({2, 2}, 0.5, rng)}};
  const auto d = parameter_digest(p);
  CHECK(parameter_digest(p) == d);
  p[0].tensor.mutable_values()[0] += 1e-12;
  CHECK(parameter_digest(p) != d);
}
