// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "s2t/error.hpp"
#include "s2t/numerics/cmtf.hpp"
#include "s2t/numerics/grad_check.hpp"
#include "s2t/numerics/ops.hpp"
#include "op_cases.hpp"

using namespace s2t;

namespace {

Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

}  // namespace

TEST_CASE("linear: identity, zero and shape errors") {
  Tape tape;
  auto w = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  auto x = tape.constant(Tensor::vector({1, 2}));
  CHECK(linear(w, x).value() == Tensor::vector({1, 2}));

  auto z = tape.constant(Tensor::matrix(2, 2, {0, 0, 0, 0}));
  CHECK(linear(z, tape.constant(Tensor::vector({3.5, -7}))).value() == Tensor::vector({0, 0}));

  auto bad = tape.constant(Tensor::vector({1, 2, 3}));
  try {
    linear(w, bad);
    FAIL("expected error");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x2]") != std::string::npos);
    CHECK(msg.find("[3]") != std::string::npos);
  }
}

TEST_CASE("linear: gradient of sum(Wx) wrt W is outer(ones, x)") {
  std::mt19937_64 rng(11);
  const Tensor W = random_tensor(rng, {3, 3});
  const Tensor x = random_tensor(rng, {3});
  Tape tape;
  auto wv = tape.leaf(W);
  auto loss = sum(linear(wv, tape.constant(x)));
  tape.backward(loss);
  // Frozen central-difference values: d/dW_rc sum(Wx) = x_c.
  auto numeric = [&](std::size_t i) {
    const double eps = 1e-6;
    auto f = [&](double delta) {
      Tensor w2 = W;
      w2[i] += delta;
      Tape t2;
      return sum(linear(t2.constant(w2), t2.constant(x))).value()[0];
    };
    return (f(eps) - f(-eps)) / (2 * eps);
  };
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(wv.grad().at(r, c) == doctest::Approx(x[c]).epsilon(1e-12));
      CHECK(numeric(r * 3 + c) == doctest::Approx(x[c]).epsilon(1e-8));
    }
  }
}

TEST_CASE("softmax: symmetry, stability, high-precision oracle") {
  Tape tape;
  auto p = softmax(tape.constant(Tensor::vector({0, 0}))).value();
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);

  auto q = softmax(tape.constant(Tensor::vector({1000, 0}))).value();
  CHECK(std::abs(q[0] - 1.0) < 1e-12);
  CHECK(std::abs(q[1]) < 1e-12);

  // 50-digit evaluation of exp(i)/sum exp(j), i in {1,2,3}.
  auto r = softmax(tape.constant(Tensor::vector({1, 2, 3}))).value();
  CHECK(std::abs(r[0] - 0.0900305731703804579980221) < 1e-15);
  CHECK(std::abs(r[1] - 0.2447284710547976524729596) < 1e-15);
  CHECK(std::abs(r[2] - 0.6652409557748218895290183) < 1e-15);

  CHECK_THROWS_AS(softmax(tape.constant(Tensor::vector({1, std::nan("")}))), NumericError);
}

TEST_CASE("softmax sums to one for large-magnitude inputs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> n(1, 12);
    Tensor s = random_tensor(rng, {static_cast<std::size_t>(n(rng))}, -1e3, 1e3);
    Tape tape;
    auto p = softmax(tape.constant(s)).value();
    double total = 0.0;
    for (double v : p.data()) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("sigmoid: midpoint, saturation, oracle") {
  Tape tape;
  auto y = sigmoid(tape.constant(Tensor::vector({0.0, -1000.0, 1000.0, 1.0}))).value();
  CHECK(y[0] == 0.5);
  CHECK(y[1] >= 0.0);
  CHECK(y[1] < 1e-12);
  CHECK(y[2] == 1.0);
  CHECK(std::abs(y[3] - 0.7310585786300048792511592) < 1e-15);
}

TEST_CASE("concat: values, empty part, errors and gradient split") {
  Tape tape;
  auto a = tape.leaf(Tensor::vector({1}));
  auto b = tape.leaf(Tensor::vector({2}));
  CHECK(concat({a, b}).value() == Tensor::vector({1, 2}));
  auto empty = tape.constant(Tensor({0}));
  CHECK(concat({a, empty}).value() == a.value());
  CHECK_THROWS_AS(concat(std::span<const Var>{}), NumericError);

  Tape t2;
  auto x = t2.leaf(Tensor::vector({1, 2, 3}));
  auto y = t2.leaf(Tensor::vector({4, 5}));
  t2.backward(sum(concat({x, y})));
  CHECK(x.grad() == Tensor::vector({1, 1, 1}));
  CHECK(y.grad() == Tensor::vector({1, 1}));
}

TEST_CASE("grad_check: quadratic and constant losses") {
  std::vector<NamedTensor> params{{"x", Tensor::vector({1, 1})}};
  auto quad = [](Tape&, std::span<const Var> p) { return dot(p[0], p[0]); };
  CHECK(grad_check(quad, params).max_rel_error < 1e-7);

  auto constant = [](Tape& t, std::span<const Var>) { return t.constant(Tensor::scalar(3.0)); };
  const auto rep = grad_check(constant, params);
  CHECK(rep.max_rel_error == 0.0);

  auto nonfinite = [](Tape&, std::span<const Var> p) { return log(scale(sum(p[0]), -1.0)); };
  CHECK_THROWS_AS(grad_check(nonfinite, params), NumericError);
}

TEST_CASE("every differentiable op passes grad_check on random small shapes") {
  for (const auto& c : oracle::op_cases()) {
    INFO(c.name);
    CHECK(oracle::op_worst_error(c) < 1e-6);
  }
}

TEST_CASE("ops are pure: identical inputs give bit-identical outputs") {
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor(rng, {9, 3});
  const Tensor w = random_tensor(rng, {3, 15});
  const Tensor b = random_tensor(rng, {3});
  auto run = [&] {
    Tape t;
    auto y = conv1d(t.constant(x), t.constant(w), t.constant(b), 5, 2, 2);
    return softmax(row(tanh(y), 1)).value();
  };
  CHECK(run() == run());
}

TEST_CASE("CMTF1 layout is bit-exact") {
  const Tensor t({2, 1}, {1.0, -2.0});
  const auto bytes = cmtf::encode(t);
  const std::vector<std::uint8_t> expected{'C', 'M', 'T', 'F', 1, 2, 2, 0, 0, 0, 1, 0, 0, 0,
                                           0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  CHECK(bytes == expected);
  CHECK(cmtf::decode(bytes) == t);

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(cmtf::decode(truncated), DataError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_AS(cmtf::decode(bad_version), DataError);
}

TEST_CASE("CMTF1 round trip equals f32 rounding") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> d(1, 6);
    const Tensor t = random_tensor(rng, {d(rng), d(rng), d(rng)}, -100, 100);
    CHECK(cmtf::decode(cmtf::encode(t)) == cmtf::round_to_f32(t));
  }
}
