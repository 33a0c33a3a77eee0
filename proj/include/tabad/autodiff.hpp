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

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape records every operation of one forward pass. Node ids are
// assigned in insertion order, which is also a valid topological order, so
// backward() is a single reverse sweep. Gradients are only materialised for
// nodes that transitively depend on a leaf created with requires_grad.
//
// A tape is single-threaded. Leaves may reference external matrices
// (constant_ref / variable_ref); those must outlive the tape's use of them.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tabad/tensor.hpp"

namespace tabad::ad {

enum class OpKind {
  kLeaf,
  kAffine,
  kRelu,
  kTanh,
  kSigmoid,
  kAdd,
  kSub,
  kScale,
  kMean,
  kSum,
  kMse,
  kRowMse,
  kBceWithLogits,
  kSliceCols,
  kConcatCols,
  kReshape,
  kGumbelSoftmax,
  kHardGumbelSoftmax,
};

const char* op_name(OpKind kind);

class Tape;

/// Handle to a node on a specific tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

struct TapeNode;

/// Propagates `node.grad` into the gradients of its parents.
using BackwardFn = std::function<void(Tape&, const TapeNode&)>;

struct TapeNode {
  OpKind kind = OpKind::kLeaf;
  std::vector<std::size_t> parents;
  Matrix owned;
  const Matrix* external = nullptr;
  bool requires_grad = false;
  Matrix grad;  // empty until something flows into it
  BackwardFn backward;

  const Matrix& value() const { return external ? *external : owned; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Matrix value);
  Var variable(Matrix value);
  // Leaves referencing caller-owned storage; no copy is made.
  Var constant_ref(const Matrix& value);
  Var variable_ref(const Matrix& value);

  /// Appends an operation node. `backward` is dropped when no parent
  /// requires a gradient.
  Var record(OpKind kind, std::span<const Var> parents, Matrix value, BackwardFn backward);

  const Matrix& value(Var v) const;
  bool requires_grad(Var v) const;

  /// Gradient of the last backward() loss w.r.t. `v`; zeros when nothing
  /// flowed into it.
  Matrix grad(Var v) const;

  /// Runs the reverse sweep from a 1x1 loss node. Gradients from a previous
  /// sweep are cleared first.
  void backward(Var loss);

  /// Gradient accumulator for node `id`, allocated on first use. Returns
  /// nullptr when the node does not require a gradient. For BackwardFn use.
  Matrix* grad_target(std::size_t id);

  const TapeNode& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  Var push_leaf(Matrix owned, const Matrix* external, bool requires_grad);
  std::size_t check(Var v) const;

  std::vector<TapeNode> nodes_;
};

Var affine(Var x, Var weight, Var bias);  // x·Wᵀ + b; W is out x in, b is 1 x out
Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
Var mean(Var a);  // 1x1
Var sum(Var a);   // 1x1
Var mse(Var a, Var b);      // 1x1 mean over every element
Var row_mse(Var a, Var b);  // n x 1, one mean per row
/// Mean binary cross-entropy of sigmoid(logits) against a constant label.
Var bce_with_logits(Var logits, double target);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);
/// Row-major reinterpretation to rows x cols (same element count).
Var reshape(Var a, std::size_t rows, std::size_t cols);

}  // namespace tabad::ad
