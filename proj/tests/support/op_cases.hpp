// SPDX-License-Identifier: Apache-2.0
// Every differentiable op with a random-shape generator, for grad_check sweeps.
#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "s2t/numerics/grad_check.hpp"
#include "s2t/numerics/ops.hpp"

namespace oracle {

using namespace s2t;

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

// Projects an op output onto a fixed random direction so no gradient is
// structurally zero.
inline Var project(Var out, const Tensor& dir) { return dot(out, out.tape().constant(dir)); }

struct OpCase {
  const char* name;
  std::function<std::vector<NamedTensor>(std::mt19937_64&, std::size_t, std::size_t)> make;
  std::function<Shape(std::size_t, std::size_t)> out_shape;
  std::function<Var(Tape&, std::span<const Var>)> build;
};

inline std::vector<OpCase> op_cases() {
  const std::vector<std::uint8_t> mask_pattern{1, 0, 0, 1, 1, 0, 1, 0};
  return {
      {"add", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return add(p[0], p[1]); }},
      {"sub", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return sub(p[0], p[1]); }},
      {"mul", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return mul(p[0], p[1]); }},
      {"scale", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return scale(p[0], -1.7); }},
      {"add_n", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}, {"c", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return add_n(p); }},
      {"linear", [](auto& r, auto n, auto m) { return std::vector<NamedTensor>{{"W", random_tensor(r, {m, n})}, {"x", random_tensor(r, {n})}}; },
       [](auto, auto m) { return Shape{m}; }, [](Tape&, auto p) { return linear(p[0], p[1]); }},
      {"linear_t", [](auto& r, auto n, auto m) { return std::vector<NamedTensor>{{"W", random_tensor(r, {m, n})}, {"x", random_tensor(r, {m})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return linear_t(p[0], p[1]); }},
      {"tanh", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n}, -2, 2)}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return tanh(p[0]); }},
      {"sigmoid", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n}, -3, 3)}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return sigmoid(p[0]); }},
      {"exp", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return exp(p[0]); }},
      {"log", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n}, 0.5, 3)}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return log(p[0]); }},
      {"softmax", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n}, -2, 2)}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return softmax(p[0]); }},
      {"concat", [](auto& r, auto n, auto m) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {m})}}; },
       [](auto n, auto m) { return Shape{n + m}; }, [](Tape&, auto p) { return concat({p[0], p[1]}); }},
      {"slice", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n + 2})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return slice(p[0], 1, p[0].size() - 2); }},
      {"stack_rows", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}}; },
       [](auto n, auto) { return Shape{2, n}; }, [](Tape&, auto p) { return stack_rows(p); }},
      {"row", [](auto& r, auto n, auto m) { return std::vector<NamedTensor>{{"M", random_tensor(r, {m, n})}}; },
       [](auto n, auto) { return Shape{n}; }, [](Tape&, auto p) { return row(p[0], p[0].value().dim(0) - 1); }},
      {"sum", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}}; },
       [](auto, auto) { return Shape{1}; }, [](Tape&, auto p) { return sum(p[0]); }},
      {"dot", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}}; },
       [](auto, auto) { return Shape{1}; }, [](Tape&, auto p) { return dot(p[0], p[1]); }},
      {"mse", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"a", random_tensor(r, {n})}, {"b", random_tensor(r, {n})}}; },
       [](auto, auto) { return Shape{1}; }, [](Tape&, auto p) { return mse(p[0], p[1]); }},
      {"conv1d", [](auto& r, auto n, auto m) {
         const std::size_t c = 1 + m % 3;
         return std::vector<NamedTensor>{{"x", random_tensor(r, {n, c})}, {"W", random_tensor(r, {c, 3 * c})}, {"b", random_tensor(r, {c})}}; },
       [](auto n, auto m) { return Shape{(n + 1) / 2, 1 + m % 3}; },
       [](Tape&, auto p) { return conv1d(p[0], p[1], p[2], 3, 2, 1); }},
      {"replace_rows", [](auto& r, auto, auto m) { return std::vector<NamedTensor>{{"x", random_tensor(r, {8, m})}, {"e", random_tensor(r, {m})}}; },
       [](auto, auto m) { return Shape{8, m}; }, [mask_pattern](Tape&, auto p) { return replace_rows(p[0], mask_pattern, p[1]); }},
      {"weighted_bce", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"p", random_tensor(r, {n}, 0.05, 0.95)}}; },
       [](auto, auto) { return Shape{1}; },
       [](Tape&, auto p) {
         std::vector<double> labels(p[0].size(), 0.0);
         labels.back() = 1.0;
         return weighted_bce(p[0], labels, 2.5);
       }},
      {"cross_entropy", [](auto& r, auto n, auto) { return std::vector<NamedTensor>{{"z", random_tensor(r, {n + 1}, -2, 2)}}; },
       [](auto, auto) { return Shape{1}; }, [](Tape&, auto p) { return cross_entropy(p[0], 1); }},
  };

}

/// Worst relative error of one op over `seeds` random shapes with dims in [1, 8].
inline double op_worst_error(const OpCase& c, std::uint64_t seeds = 100) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(seed * 7919 + 1);
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    const std::size_t n = dim(rng), m = dim(rng);
    auto params = c.make(rng, n, m);
    const Tensor dir = random_tensor(rng, c.out_shape(n, m), 0.5, 1.5);
    auto loss = [&](Tape& t, std::span<const Var> p) { return project(c.build(t, p), dir); };
    worst = std::max(worst, grad_check(loss, params).max_rel_error);
  }
  return worst;
}

}  // namespace oracle
