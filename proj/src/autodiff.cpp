/* Copyright (c) 2026 The tabad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "tabad/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tabad::ad {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kAffine: return "affine";
    case OpKind::kRelu: return "relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kScale: return "scale";
    case OpKind::kMean: return "mean";
    case OpKind::kSum: return "sum";
    case OpKind::kMse: return "mse";
    case OpKind::kRowMse: return "row_mse";
    case OpKind::kBceWithLogits: return "bce_with_logits";
    case OpKind::kSliceCols: return "slice_cols";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kReshape: return "reshape";
    case OpKind::kGumbelSoftmax: return "gumbel_softmax";
    case OpKind::kHardGumbelSoftmax: return "hard_gumbel_softmax";
  }
  return "unknown";
}

Var Tape::push_leaf(Matrix owned, const Matrix* external, bool requires_grad) {
  TapeNode node;
  node.kind = OpKind::kLeaf;
  node.owned = std::move(owned);
  node.external = external;
  node.requires_grad = requires_grad;
  if (node.value().empty()) throw std::invalid_argument("tape leaf must not be empty");
  if (!node.value().all_finite()) throw NonFiniteError("tape leaf contains NaN/Inf");
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) { return push_leaf(std::move(value), nullptr, false); }
Var Tape::variable(Matrix value) { return push_leaf(std::move(value), nullptr, true); }
Var Tape::constant_ref(const Matrix& value) { return push_leaf(Matrix(), &value, false); }
Var Tape::variable_ref(const Matrix& value) { return push_leaf(Matrix(), &value, true); }

std::size_t Tape::check(Var v) const {
  if (v.tape != this) throw std::invalid_argument("variable belongs to a different tape");
  if (v.id >= nodes_.size()) {
    throw std::out_of_range("tape node " + std::to_string(v.id) + " referenced before definition");
  }
  return v.id;
}

Var Tape::record(OpKind kind, std::span<const Var> parents, Matrix value, BackwardFn backward) {
  TapeNode node;
  node.kind = kind;
  node.parents.reserve(parents.size());
  for (Var p : parents) {
    node.parents.push_back(check(p));
    node.requires_grad = node.requires_grad || nodes_[p.id].requires_grad;
  }
  if (!value.all_finite()) {
    throw NonFiniteError(std::string("non-finite value produced by ") + op_name(kind));
  }
  node.owned = std::move(value);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const { return nodes_[check(v)].value(); }

bool Tape::requires_grad(Var v) const { return nodes_[check(v)].requires_grad; }

Matrix Tape::grad(Var v) const {
  const TapeNode& n = nodes_[check(v)];
  if (n.grad.empty()) return Matrix(n.value().rows(), n.value().cols());
  return n.grad;
}

Matrix* Tape::grad_target(std::size_t id) {
  TapeNode& n = nodes_.at(id);
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Matrix(n.value().rows(), n.value().cols());
  return &n.grad;
}

void Tape::backward(Var loss) {
  const std::size_t root = check(loss);
  const Matrix& lv = nodes_[root].value();
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::invalid_argument("backward: loss must be a 1x1 scalar node, got " + shape_string(lv));
  }
  for (auto& n : nodes_) n.grad = Matrix();
  if (!nodes_[root].requires_grad) return;
  nodes_[root].grad = Matrix(1, 1, 1.0);
  for (std::size_t i = root + 1; i-- > 0;) {
    const TapeNode& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, n);
  }
}

namespace {

Tape& tape_of(Var a) {
  if (!a.tape) throw std::invalid_argument("variable is not attached to a tape");
  return *a.tape;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                                shape_string(b));
  }
}

// `dfdy` maps an output value to the local derivative.
template <class F, class D>
Var unary_elementwise(Var x, OpKind kind, F f, D dfdy) {
  Tape& t = tape_of(x);
  Matrix out = t.value(x);
  for (double& v : out.values()) v = f(v);
  return t.record(kind, {&x, 1}, std::move(out), [dfdy](Tape& tp, const TapeNode& n) {
    Matrix* d = tp.grad_target(n.parents[0]);
    if (!d) return;
    auto dv = d->values();
    auto gv = n.grad.values();
    auto yv = n.value().values();
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += gv[i] * dfdy(yv[i]);
  });
}

}  // namespace

Var affine(Var x, Var weight, Var bias) {
  Tape& t = tape_of(x);
  const Matrix& xv = t.value(x);
  const Matrix& wv = t.value(weight);
  const Matrix& bv = t.value(bias);
  if (wv.cols() != xv.cols() || bv.rows() != 1 || bv.cols() != wv.rows()) {
    throw std::invalid_argument("affine: input " + shape_string(xv) + ", weight " +
                                shape_string(wv) + ", bias " + shape_string(bv) +
                                " do not conform");
  }
  Matrix out;
  kernels::affine(xv, wv, &bv, out);
  const Var parents[] = {x, weight, bias};
  return t.record(OpKind::kAffine, parents, std::move(out), [](Tape& tp, const TapeNode& n) {
    const Matrix& g = n.grad;
    const Matrix& xin = tp.node(n.parents[0]).value();
    const Matrix& w = tp.node(n.parents[1]).value();
    if (Matrix* dx = tp.grad_target(n.parents[0])) kernels::affine_backward_input(g, w, *dx);
    if (Matrix* dw = tp.grad_target(n.parents[1])) kernels::affine_backward_weight(g, xin, *dw);
    if (Matrix* db = tp.grad_target(n.parents[2])) {
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) (*db)(0, c) += g(r, c);
    }
  });
}

Var relu(Var x) {
  return unary_elementwise(
      x, OpKind::kRelu, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary_elementwise(
      x, OpKind::kTanh, [](double v) { return std::tanh(v); },
      [](double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary_elementwise(
      x, OpKind::kSigmoid,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double y) { return y * (1.0 - y); });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a);
  auto bv = t.value(b).values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += bv[i];
  const Var parents[] = {a, b};
  return t.record(OpKind::kAdd, parents, std::move(out), [](Tape& tp, const TapeNode& n) {
    for (std::size_t p : n.parents) {
      if (Matrix* d = tp.grad_target(p)) {
        auto dv = d->values();
        auto gv = n.grad.values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += gv[i];
      }
    }
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(t.value(a), t.value(b), "sub");
  Matrix out = t.value(a);
  auto bv = t.value(b).values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] -= bv[i];
  const Var parents[] = {a, b};
  return t.record(OpKind::kSub, parents, std::move(out), [](Tape& tp, const TapeNode& n) {
    const double sign[] = {1.0, -1.0};
    for (std::size_t k = 0; k < 2; ++k) {
      if (Matrix* d = tp.grad_target(n.parents[k])) {
        auto dv = d->values();
        auto gv = n.grad.values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += sign[k] * gv[i];
      }
    }
  });
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  Matrix out = t.value(a);
  for (double& v : out.values()) v *= factor;
  return t.record(OpKind::kScale, {&a, 1}, std::move(out), [factor](Tape& tp, const TapeNode& n) {
    if (Matrix* d = tp.grad_target(n.parents[0])) {
      auto dv = d->values();
      auto gv = n.grad.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += factor * gv[i];
    }
  });
}

namespace {

Var reduce_all(Var a, OpKind kind, double weight) {
  Tape& t = tape_of(a);
  double acc = 0.0;
  for (double v : t.value(a).values()) acc += v;
  return t.record(kind, {&a, 1}, Matrix(1, 1, acc * weight), [weight](Tape& tp, const TapeNode& n) {
    if (Matrix* d = tp.grad_target(n.parents[0])) {
      const double g = n.grad(0, 0) * weight;
      for (double& v : d->values()) v += g;
    }
  });
}

}  // namespace

Var mean(Var a) {
  return reduce_all(a, OpKind::kMean, 1.0 / static_cast<double>(tape_of(a).value(a).size()));
}

Var sum(Var a) { return reduce_all(a, OpKind::kSum, 1.0); }

Var mse(Var a, Var b) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "mse");
  const double value = tabad::mse(av.values(), bv.values());
  const Var parents[] = {a, b};
  return t.record(OpKind::kMse, parents, Matrix(1, 1, value), [](Tape& tp, const TapeNode& n) {
    const auto x = tp.node(n.parents[0]).value().values();
    const auto y = tp.node(n.parents[1]).value().values();
    const double k = 2.0 * n.grad(0, 0) / static_cast<double>(x.size());
    const double sign[] = {1.0, -1.0};
    for (std::size_t p = 0; p < 2; ++p) {
      if (Matrix* d = tp.grad_target(n.parents[p])) {
        auto dv = d->values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += sign[p] * k * (x[i] - y[i]);
      }
    }
  });
}

Var row_mse(Var a, Var b) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "row_mse");
  Matrix out(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) out(r, 0) = tabad::mse(av.row_span(r), bv.row_span(r));
  const Var parents[] = {a, b};
  return t.record(OpKind::kRowMse, parents, std::move(out), [](Tape& tp, const TapeNode& n) {
    const Matrix& x = tp.node(n.parents[0]).value();
    const Matrix& y = tp.node(n.parents[1]).value();
    const double inv = 2.0 / static_cast<double>(x.cols());
    const double sign[] = {1.0, -1.0};
    for (std::size_t p = 0; p < 2; ++p) {
      Matrix* d = tp.grad_target(n.parents[p]);
      if (!d) continue;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double k = sign[p] * inv * n.grad(r, 0);
        for (std::size_t c = 0; c < x.cols(); ++c) (*d)(r, c) += k * (x(r, c) - y(r, c));
      }
    }
  });
}

Var bce_with_logits(Var logits, double target) {
  Tape& t = tape_of(logits);
  const Matrix& l = t.value(logits);
  double acc = 0.0;
  for (double v : l.values()) {
    // max(v, 0) - v*t + log(1 + exp(-|v|))
    acc += std::max(v, 0.0) - v * target + std::log1p(std::exp(-std::abs(v)));
  }
  const double n_inv = 1.0 / static_cast<double>(l.size());
  return t.record(OpKind::kBceWithLogits, {&logits, 1}, Matrix(1, 1, acc * n_inv),
                  [target, n_inv](Tape& tp, const TapeNode& n) {
                    Matrix* d = tp.grad_target(n.parents[0]);
                    if (!d) return;
                    const auto lv = tp.node(n.parents[0]).value().values();
                    auto dv = d->values();
                    const double g = n.grad(0, 0) * n_inv;
                    for (std::size_t i = 0; i < dv.size(); ++i) {
                      const double v = lv[i];
                      const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                                : std::exp(v) / (1.0 + std::exp(v));
                      dv[i] += g * (s - target);
                    }
                  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (count == 0 || begin + count > av.cols()) {
    throw std::invalid_argument("slice_cols: range [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") outside " + shape_string(av));
  }
  Matrix out(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = av(r, begin + c);
  return t.record(OpKind::kSliceCols, {&a, 1}, std::move(out), [begin](Tape& tp, const TapeNode& n) {
    if (Matrix* d = tp.grad_target(n.parents[0])) {
      for (std::size_t r = 0; r < n.grad.rows(); ++r)
        for (std::size_t c = 0; c < n.grad.cols(); ++c) (*d)(r, begin + c) += n.grad(r, c);
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: nothing to concatenate");
  Tape& t = tape_of(parts.front());
  const std::size_t rows = t.value(parts.front()).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (t.value(p).rows() != rows) throw std::invalid_argument("concat_cols: row count mismatch");
    cols += t.value(p).cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = t.value(p);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
    offset += pv.cols();
  }
  return t.record(OpKind::kConcatCols, parts, std::move(out), [](Tape& tp, const TapeNode& n) {
    std::size_t off = 0;
    for (std::size_t p : n.parents) {
      const std::size_t w = tp.node(p).value().cols();
      if (Matrix* d = tp.grad_target(p)) {
        for (std::size_t r = 0; r < n.grad.rows(); ++r)
          for (std::size_t c = 0; c < w; ++c) (*d)(r, c) += n.grad(r, off + c);
      }
      off += w;
    }
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (rows * cols != av.size()) {
    throw std::invalid_argument("reshape: cannot view " + shape_string(av) + " as " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix out(rows, cols, av.storage());
  return t.record(OpKind::kReshape, {&a, 1}, std::move(out), [](Tape& tp, const TapeNode& n) {
    if (Matrix* d = tp.grad_target(n.parents[0])) {
      auto dv = d->values();
      auto gv = n.grad.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += gv[i];
    }
  });
}

}  // namespace tabad::ad
