#pragma once

// Minimal reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation as a node holding its forward value and a
// closure that scatters the upstream gradient into its parents. Nodes are
// appended in topological order, so backward() is a single reverse sweep.
// Operations whose inputs are all constants record no closure.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace a2dcdr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

namespace ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);

  // Records an op node. `backward` is dropped when no parent needs a gradient.
  Var record(Matrix value, std::span<const Var> parents, Backward backward);
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
  }

  // Seeds d(root)/d(root) = 1; root must be 1x1.
  void backward(const Var& root);

  // Adds `delta` into the gradient slot of `target` (no-op for constants).
  void accumulate(const Var& target, const Matrix& delta);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Maps model-owned parameter matrices onto tape leaves. Parameters bound while
// frozen enter the tape as constants, so no gradient reaches them.
class Binder {
 public:
  explicit Binder(Tape& tape) : tape_(&tape) {}

  Var operator()(const Matrix& parameter);
  // Must precede the first binding of `parameter`.
  void freeze(const Matrix& parameter);
  void set_default_trainable(bool trainable) { default_trainable_ = trainable; }

  // Zero matrix when the parameter was never bound or was frozen.
  Matrix gradient(const Matrix& parameter) const;
  Tape& tape() const { return *tape_; }

 private:
  Tape* tape_;
  bool default_trainable_ = true;
  std::unordered_map<const Matrix*, bool> frozen_;
  std::unordered_map<const Matrix*, Var> bound_;
};

// ---- elementwise and linear algebra ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var cwise_mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var matmul(const Var& a, const Var& b);
Var add_row_bias(const Var& x, const Var& bias);  // bias is 1 x cols
Var relu(const Var& a);
Var square(const Var& a);
Var exp(const Var& a);
Var clamp(const Var& a, double lo, double hi);
Var sqrt_clamped(const Var& a);  // sqrt(max(a, 0)); zero gradient where a <= 0

// ---- reductions / reshaping ----
Var sum(const Var& a);
Var mean(const Var& a);
Var row_sum(const Var& a);                 // n x 1
Var rowwise_dot(const Var& a, const Var& b);  // n x 1
Var scale_rows(const Var& a, const Var& weights);  // a(i,:) * weights(i,0)
Var column(const Var& a, Eigen::Index c);
Var hstack(std::span<const Var> parts);
Var concat_cols(const Var& a, const Var& b);
Var gather_rows(const Var& a, std::span<const int> rows);
Var softmax_rows(const Var& a);

// ---- structured ops ----
Var spmm(const SparseMatrix& lhs, const SparseMatrix& lhs_transpose, const Var& x);
Var gradient_reversal(const Var& x, double scale);
Var detach(const Var& x);

// Mean binary cross-entropy of logistic(scores) against labels (n x 1).
Var bce_with_logits(const Var& scores, const Vector& labels);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

}  // namespace ad
}  // namespace a2dcdr
