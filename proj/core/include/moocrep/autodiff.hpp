#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moocrep/tensor.hpp"

namespace moocrep {

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad();
};

class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double item() const { return value().item(); }

  Tape* tape() const noexcept { return tape_; }
  std::size_t index() const noexcept { return index_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode gradient tape. Each op appends one node; backward() replays
/// nodes in reverse and accumulates into Parameter::grad for every parameter
/// leaf reachable from the loss. A tape belongs to one thread at a time.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to `param`; backward() adds its gradient to param.grad.
  Var parameter(Parameter& param);

  /// Records an op result. `inputs` decide whether the node needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backprop backprop);
  Var record(Tensor value, std::span<const Var> inputs, Backprop backprop);

  void backward(Var loss);

  const Tensor& value(std::size_t index) const { return nodes_[index].value; }
  bool needs_grad(std::size_t index) const { return nodes_[index].needs_grad; }
  /// Gradient buffer of a node, allocated on first use.
  Tensor& grad(std::size_t index);
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::optional<Tensor> grad;
    Backprop backprop;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// Primitive ops. Every op validates shapes and throws NumericError if the
// forward value contains NaN or infinity.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a (m x n) plus a 1 x n bias row broadcast over rows.
Var add_row(Var a, Var bias);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var select_row(Var a, std::size_t r);
Var relu(Var a);
/// max(a, 0) elementwise; same as relu but named for hinge losses.
Var hinge(Var a);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
/// Row-wise softmax. Columns with key_mask[j] == true receive weight exactly 0.
Var softmax_rows(Var a, std::span<const bool> key_mask = {});
/// Row-wise layer normalization followed by elementwise gain and bias (1 x n each).
Var layer_norm_rows(Var a, Var gain, Var bias, double eps);
/// Dot product of two equally shaped tensors, 1 x 1.
Var dot(Var a, Var b);
/// Cosine similarity of two equally shaped tensors, 1 x 1. Throws NumericError
/// if either norm is below 1e-12.
Var cosine(Var a, Var b);
/// Mean binary cross-entropy of logits (n x 1) against 0/1 targets.
Var bce_with_logits(Var logits, std::span<const double> targets);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(double factor, Var a);

}  // namespace moocrep
