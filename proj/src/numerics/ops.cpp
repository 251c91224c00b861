// SPDX-License-Identifier: Apache-2.0
#include "s2t/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "s2t/error.hpp"

namespace s2t {
namespace {

void require_same(const char* op, Var a, Var b) {
  if (a.value().size() != b.value().size()) {
    throw NumericError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                       shape_str(b.shape()));
  }
}

void require_rank1(const char* op, Var a) {
  if (a.value().rank() != 1) {
    throw NumericError(std::string(op) + ": expected rank-1 input, got " + shape_str(a.shape()));
  }
}

void require_rank2(const char* op, Var a) {
  if (a.value().rank() != 2) {
    throw NumericError(std::string(op) + ": expected matrix, got " + shape_str(a.shape()));
  }
}

// Accumulates into an input gradient when that input participates.
template <class F>
void accumulate(Tape& t, Var in, F&& f) {
  if (!in.requires_grad()) return;
  f(t.grad_mut(in.id()));
}

template <class Fwd, class Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return a.tape().record(std::move(y), {a}, [a, deriv](Tape& t, std::size_t self) {
    accumulate(t, a, [&](Tensor& ga) {
      const Tensor& g = t.grad(self);
      const Tensor& x = a.value();
      const Tensor& y = t.value(self);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
    });
  });
}

}  // namespace

namespace plain {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw NumericError("softmax: empty input");
  double mx = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (std::isnan(s)) throw NumericError("softmax: NaN score");
    mx = std::max(mx, s);
  }
  std::vector<double> out(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    z += out[i];
  }
  for (double& o : out) o /= z;
  return out;
}

}  // namespace plain

Var add(Var a, Var b) {
  require_same("add", a, b);
  Tensor y = a.value();
  y += b.value();
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, a, [&](Tensor& ga) { ga += g; });
    accumulate(t, b, [&](Tensor& gb) { gb += g; });
  });
}

Var sub(Var a, Var b) {
  require_same("sub", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, a, [&](Tensor& ga) { ga += g; });
    accumulate(t, b, [&](Tensor& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    });
  });
}

Var mul(Var a, Var b) {
  require_same("mul", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.value()[i];
    });
    accumulate(t, b, [&](Tensor& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.value()[i];
    });
  });
}

Var scale(Var a, double s) {
  Tensor y = a.value();
  for (double& v : y.data()) v *= s;
  return a.tape().record(std::move(y), {a}, [a, s](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
    });
  });
}

Var add_n(std::span<const Var> parts) {
  if (parts.empty()) throw NumericError("add_n: no inputs");
  Tensor y = parts.front().value();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    require_same("add_n", parts.front(), parts[k]);
    y += parts[k].value();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts.front().tape().record(std::move(y), parts, [ins](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (const Var& p : ins) accumulate(t, p, [&](Tensor& gp) { gp += g; });
  });
}

Var linear(Var w, Var x) {
  require_rank2("linear", w);
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  const std::size_t m = W.dim(0), n = W.dim(1);
  if (X.size() != n) {
    throw NumericError("linear: weight " + shape_str(W.shape()) + " incompatible with input " +
                       shape_str(X.shape()));
  }
  Tensor y({m});
  for (std::size_t r = 0; r < m; ++r) {
    const double* wr = W.data().data() + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += wr[c] * X[c];
    y[r] = acc;
  }
  return w.tape().record(std::move(y), {w, x}, [w, x, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, w, [&](Tensor& gw) {
      const Tensor& X = x.value();
      for (std::size_t r = 0; r < m; ++r) {
        if (g[r] == 0.0) continue;
        double* row = gw.data().data() + r * n;
        for (std::size_t c = 0; c < n; ++c) row[c] += g[r] * X[c];
      }
    });
    accumulate(t, x, [&](Tensor& gx) {
      const Tensor& W = w.value();
      for (std::size_t r = 0; r < m; ++r) {
        const double* wr = W.data().data() + r * n;
        for (std::size_t c = 0; c < n; ++c) gx[c] += wr[c] * g[r];
      }
    });
  });
}

Var linear_t(Var w, Var x) {
  require_rank2("linear_t", w);
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  const std::size_t m = W.dim(0), n = W.dim(1);
  if (X.size() != m) {
    throw NumericError("linear_t: weight " + shape_str(W.shape()) + " incompatible with input " +
                       shape_str(X.shape()));
  }
  Tensor y({n});
  for (std::size_t r = 0; r < m; ++r) {
    const double* wr = W.data().data() + r * n;
    for (std::size_t c = 0; c < n; ++c) y[c] += wr[c] * X[r];
  }
  return w.tape().record(std::move(y), {w, x}, [w, x, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, w, [&](Tensor& gw) {
      const Tensor& X = x.value();
      for (std::size_t r = 0; r < m; ++r) {
        double* row = gw.data().data() + r * n;
        for (std::size_t c = 0; c < n; ++c) row[c] += X[r] * g[c];
      }
    });
    accumulate(t, x, [&](Tensor& gx) {
      const Tensor& W = w.value();
      for (std::size_t r = 0; r < m; ++r) {
        const double* wr = W.data().data() + r * n;
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += wr[c] * g[c];
        gx[r] += acc;
      }
    });
  });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(a, [](double x) { return plain::sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var softmax(Var scores) {
  require_rank1("softmax", scores);
  auto p = plain::softmax(scores.value().data());
  Tensor y = Tensor::vector(std::move(p));
  return scores.tape().record(std::move(y), {scores}, [scores](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    double gy = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    accumulate(t, scores, [&](Tensor& gs) {
      for (std::size_t i = 0; i < g.size(); ++i) gs[i] += y[i] * (g[i] - gy);
    });
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw NumericError("concat: empty list");
  std::vector<double> data;
  for (const Var& p : parts) {
    require_rank1("concat", p);
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts.front().tape().record(Tensor::vector(std::move(data)), parts, [ins](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (const Var& p : ins) {
      const std::size_t n = p.size();
      accumulate(t, p, [&](Tensor& gp) {
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
      });
      off += n;
    }
  });
}

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var slice(Var a, std::size_t offset, std::size_t length) {
  if (offset + length > a.size()) {
    throw NumericError("slice: [" + std::to_string(offset) + ", +" + std::to_string(length) + ") out of " +
                       shape_str(a.shape()));
  }
  auto src = a.value().data().subspan(offset, length);
  Tensor y = Tensor::vector({src.begin(), src.end()});
  return a.tape().record(std::move(y), {a}, [a, offset, length](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < length; ++i) ga[offset + i] += g[i];
    });
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw NumericError("stack_rows: no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * d);
  for (const Var& r : rows) {
    if (r.size() != d) {
      throw NumericError("stack_rows: ragged rows " + shape_str(rows.front().shape()) + " vs " +
                         shape_str(r.shape()));
    }
    data.insert(data.end(), r.value().data().begin(), r.value().data().end());
  }
  std::vector<Var> ins(rows.begin(), rows.end());
  return rows.front().tape().record(Tensor({rows.size(), d}, std::move(data)), rows,
                                    [ins, d](Tape& t, std::size_t self) {
                                      const Tensor& g = t.grad(self);
                                      for (std::size_t k = 0; k < ins.size(); ++k) {
                                        accumulate(t, ins[k], [&](Tensor& gr) {
                                          for (std::size_t i = 0; i < d; ++i) gr[i] += g[k * d + i];
                                        });
                                      }
                                    });
}

Var row(Var matrix, std::size_t r) {
  require_rank2("row", matrix);
  if (r >= matrix.value().dim(0)) throw NumericError("row: index out of range");
  const std::size_t d = matrix.value().dim(1);
  Tensor y = matrix.value().row_tensor(r);
  return matrix.tape().record(std::move(y), {matrix}, [matrix, r, d](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, matrix, [&](Tensor& gm) {
      for (std::size_t i = 0; i < d; ++i) gm[r * d + i] += g[i];
    });
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(Tensor::scalar(s), {a}, [a](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    accumulate(t, a, [&](Tensor& ga) {
      for (double& v : ga.data()) v += g;
    });
  });
}

Var dot(Var a, Var b) {
  require_same("dot", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.value()[i] * b.value()[i];
  return a.tape().record(Tensor::scalar(s), {a, b}, [a, b](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    accumulate(t, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * b.value()[i];
    });
    accumulate(t, b, [&](Tensor& gb) {
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * a.value()[i];
    });
  });
}

Var mse(Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw NumericError("mse: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  if (a.size() == 0) throw NumericError("mse: empty input");
  const double n = static_cast<double>(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.value()[i] - b.value()[i];
    s += d * d;
  }
  return a.tape().record(Tensor::scalar(s / n), {a, b}, [a, b, n](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    accumulate(t, a, [&](Tensor& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * 2.0 * (A[i] - B[i]) / n;
    });
    accumulate(t, b, [&](Tensor& gb) {
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g * 2.0 * (A[i] - B[i]) / n;
    });
  });
}

Var conv1d(Var x, Var w, Var b, std::size_t kernel, std::size_t stride, std::size_t pad) {
  require_rank2("conv1d", x);
  require_rank2("conv1d", w);
  const std::size_t L = x.value().dim(0), cin = x.value().dim(1);
  const std::size_t cout = w.value().dim(0);
  if (w.value().dim(1) != kernel * cin || b.size() != cout) {
    throw NumericError("conv1d: weight " + shape_str(w.shape()) + " / bias " + shape_str(b.shape()) +
                       " incompatible with input " + shape_str(x.shape()) + " and kernel " + std::to_string(kernel));
  }
  if (stride == 0 || L + 2 * pad < kernel) throw NumericError("conv1d: input too short for kernel");
  const std::size_t out_len = (L + 2 * pad - kernel) / stride + 1;
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  Tensor y({out_len, cout});
  for (std::size_t p = 0; p < out_len; ++p) {
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = b.value()[o];
      const double* wr = W.data().data() + o * kernel * cin;
      for (std::size_t j = 0; j < kernel; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(p * stride + j) - static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
        const double* xr = X.data().data() + static_cast<std::size_t>(src) * cin;
        for (std::size_t c = 0; c < cin; ++c) acc += wr[j * cin + c] * xr[c];
      }
      y.at(p, o) = acc;
    }
  }
  return x.tape().record(std::move(y), {x, w, b},
                         [x, w, b, kernel, stride, pad, L, cin, cout, out_len](Tape& t, std::size_t self) {
                           const Tensor& g = t.grad(self);
                           const Tensor& X = x.value();
                           const Tensor& W = w.value();
                           const bool gx_on = x.requires_grad(), gw_on = w.requires_grad();
                           Tensor* gx = gx_on ? &t.grad_mut(x.id()) : nullptr;
                           Tensor* gw = gw_on ? &t.grad_mut(w.id()) : nullptr;
                           accumulate(t, b, [&](Tensor& gb) {
                             for (std::size_t p = 0; p < out_len; ++p)
                               for (std::size_t o = 0; o < cout; ++o) gb[o] += g.at(p, o);
                           });
                           if (!gx_on && !gw_on) return;
                           for (std::size_t p = 0; p < out_len; ++p) {
                             for (std::size_t o = 0; o < cout; ++o) {
                               const double go = g.at(p, o);
                               if (go == 0.0) continue;
                               for (std::size_t j = 0; j < kernel; ++j) {
                                 const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(p * stride + j) -
                                                            static_cast<std::ptrdiff_t>(pad);
                                 if (src < 0 || src >= static_cast<std::ptrdiff_t>(L)) continue;
                                 const std::size_t s = static_cast<std::size_t>(src);
                                 for (std::size_t c = 0; c < cin; ++c) {
                                   const std::size_t wi = o * kernel * cin + j * cin + c;
                                   if (gw) (*gw)[wi] += go * X.at(s, c);
                                   if (gx) gx->at(s, c) += go * W[wi];
                                 }
                               }
                             }
                           }
                         });
}

Var replace_rows(Var x, std::span<const std::uint8_t> mask, Var replacement) {
  require_rank2("replace_rows", x);
  const std::size_t L = x.value().dim(0), d = x.value().dim(1);
  if (mask.size() != L || replacement.size() != d) {
    throw NumericError("replace_rows: mask/replacement incompatible with " + shape_str(x.shape()));
  }
  Tensor y = x.value();
  for (std::size_t r = 0; r < L; ++r) {
    if (!mask[r]) continue;
    for (std::size_t c = 0; c < d; ++c) y.at(r, c) = replacement.value()[c];
  }
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  return x.tape().record(std::move(y), {x, replacement}, [x, replacement, m, d](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    accumulate(t, x, [&](Tensor& gx) {
      for (std::size_t r = 0; r < m.size(); ++r)
        if (!m[r])
          for (std::size_t c = 0; c < d; ++c) gx.at(r, c) += g.at(r, c);
    });
    accumulate(t, replacement, [&](Tensor& ge) {
      for (std::size_t r = 0; r < m.size(); ++r)
        if (m[r])
          for (std::size_t c = 0; c < d; ++c) ge[c] += g.at(r, c);
    });
  });
}

Var weighted_bce(Var probs, std::span<const double> labels, double pos_weight, double clamp) {
  if (labels.size() != probs.size() || labels.empty()) {
    throw NumericError("weighted_bce: " + std::to_string(labels.size()) + " labels for probabilities " +
                       shape_str(probs.shape()));
  }
  const double n = static_cast<double>(labels.size());
  const Tensor& P = probs.value();
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(P[i], clamp, 1.0 - clamp);
    loss -= pos_weight * labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  std::vector<double> y(labels.begin(), labels.end());
  return probs.tape().record(Tensor::scalar(loss / n), {probs},
                             [probs, y, pos_weight, clamp, n](Tape& t, std::size_t self) {
                               const double g = t.grad(self)[0];
                               accumulate(t, probs, [&](Tensor& gp) {
                                 const Tensor& P = probs.value();
                                 for (std::size_t i = 0; i < y.size(); ++i) {
                                   const double p = std::clamp(P[i], clamp, 1.0 - clamp);
                                   gp[i] += g * (-pos_weight * y[i] / p + (1.0 - y[i]) / (1.0 - p)) / n;
                                 }
                               });
                             });
}

Var cross_entropy(Var logits, std::size_t target) {
  require_rank1("cross_entropy", logits);
  if (target >= logits.size()) throw NumericError("cross_entropy: target out of range");
  auto p = plain::softmax(logits.value().data());
  const double loss = -std::log(std::max(p[target], std::numeric_limits<double>::min()));
  return logits.tape().record(Tensor::scalar(loss), {logits}, [logits, p, target](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    accumulate(t, logits, [&](Tensor& gl) {
      for (std::size_t i = 0; i < p.size(); ++i) gl[i] += g * (p[i] - (i == target ? 1.0 : 0.0));
    });
  });
}

Var detach(Var a) { return a.tape().constant(a.value()); }

}  // namespace s2t
