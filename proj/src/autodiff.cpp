#include "a2dcdr/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace a2dcdr::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw std::logic_error("autodiff: use of an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw std::logic_error("autodiff: operands live on different tapes");
  return tape_of(a);
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) needs = needs || p.requires_grad();
  nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(const Var& target, const Matrix& delta) {
  Node& node = nodes_[target.id()];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = delta;
  } else {
    node.grad += delta;
  }
}

const Matrix& Tape::grad(std::size_t id) const {
  const Node& node = nodes_[id];
  if (node.grad.size() == 0) {
    // Materialize zeros lazily so callers always see a value-shaped gradient.
    auto& mutable_node = const_cast<Node&>(node);
    mutable_node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw std::logic_error("backward: root belongs to another tape");
  if (root.rows() != 1 || root.cols() != 1) throw std::invalid_argument("backward: root must be a scalar");
  for (Node& node : nodes_) node.grad.resize(0, 0);
  if (!nodes_[root.id()].requires_grad) return;
  nodes_[root.id()].grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.size() == 0) continue;
    // Closures only write into parents (lower ids), so node.grad stays stable.
    node.backward(*this, node.grad);
  }
}

Var Binder::operator()(const Matrix& parameter) {
  if (auto it = bound_.find(&parameter); it != bound_.end()) return it->second;
  bool trainable = default_trainable_;
  if (auto it = frozen_.find(&parameter); it != frozen_.end()) trainable = false;
  Var v = trainable ? tape_->variable(parameter) : tape_->constant(parameter);
  bound_.emplace(&parameter, v);
  return v;
}

void Binder::freeze(const Matrix& parameter) {
  if (auto it = bound_.find(&parameter); it != bound_.end() && it->second.requires_grad()) {
    throw std::logic_error("Binder::freeze: parameter already bound as trainable");
  }
  frozen_.emplace(&parameter, true);
}

Matrix Binder::gradient(const Matrix& parameter) const {
  auto it = bound_.find(&parameter);
  if (it == bound_.end() || !it->second.requires_grad()) {
    return Matrix::Zero(parameter.rows(), parameter.cols());
  }
  return it->second.grad();
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tape& t = tape_of(a, b);
  return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tape& t = tape_of(a, b);
  return t.record(a.value() - b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, -g);
  });
}

Var cwise_mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "cwise_mul");
  Tape& t = tape_of(a, b);
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) tp.accumulate(a, g.cwiseProduct(b.value()));
    if (b.requires_grad()) tp.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(const Var& a, double factor) {
  Tape& t = tape_of(a);
  return t.record(a.value() * factor, {a}, [a, factor](Tape& tp, const Matrix& g) { tp.accumulate(a, g * factor); });
}

Var add_scalar(const Var& a, double offset) {
  Tape& t = tape_of(a);
  return t.record((a.value().array() + offset).matrix(), {a}, [a](Tape& tp, const Matrix& g) { tp.accumulate(a, g); });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  Tape& t = tape_of(a, b);
  return t.record(a.value() * b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) tp.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) tp.accumulate(b, a.value().transpose() * g);
  });
}

Var add_row_bias(const Var& x, const Var& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) throw std::invalid_argument("add_row_bias: bias must be 1 x cols");
  Tape& t = tape_of(x, bias);
  Matrix out = x.value().rowwise() + bias.value().row(0);
  return t.record(std::move(out), {x, bias}, [x, bias](Tape& tp, const Matrix& g) {
    tp.accumulate(x, g);
    if (bias.requires_grad()) tp.accumulate(bias, g.colwise().sum());
  });
}

Var relu(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(a.value().cwiseMax(0.0), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (a.value().array() > 0.0).select(g.array(), 0.0).matrix());
  });
}

Var square(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(a.value().array().square().matrix(), {a},
                  [a](Tape& tp, const Matrix& g) { tp.accumulate(a, 2.0 * g.cwiseProduct(a.value())); });
}

Var exp(const Var& a) {
  Tape& t = tape_of(a);
  Matrix out = a.value().array().exp().matrix();
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseProduct(tp.value(self)));
  });
}

Var clamp(const Var& a, double lo, double hi) {
  Tape& t = tape_of(a);
  return t.record(a.value().cwiseMax(lo).cwiseMin(hi), {a}, [a, lo, hi](Tape& tp, const Matrix& g) {
    const auto& v = a.value().array();
    tp.accumulate(a, ((v >= lo) && (v <= hi)).select(g.array(), 0.0).matrix());
  });
}

Var sqrt_clamped(const Var& a) {
  Tape& t = tape_of(a);
  Matrix out = a.value().cwiseMax(0.0).cwiseSqrt();
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& root = tp.value(self);
    Matrix d = (root.array() > 0.0).select(g.array() / (2.0 * root.array().max(1e-300)), 0.0).matrix();
    tp.accumulate(a, d);
  });
}

Var sum(const Var& a) {
  Tape& t = tape_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw std::invalid_argument("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_sum(const Var& a) {
  Tape& t = tape_of(a);
  return t.record(a.value().rowwise().sum(), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.col(0).replicate(1, a.cols()));
  });
}

Var rowwise_dot(const Var& a, const Var& b) {
  require_same_shape(a, b, "rowwise_dot");
  Tape& t = tape_of(a, b);
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) tp.accumulate(a, (b.value().array().colwise() * g.col(0).array()).matrix());
    if (b.requires_grad()) tp.accumulate(b, (a.value().array().colwise() * g.col(0).array()).matrix());
  });
}

Var scale_rows(const Var& a, const Var& weights) {
  if (weights.cols() != 1 || weights.rows() != a.rows()) throw std::invalid_argument("scale_rows: weights must be n x 1");
  Tape& t = tape_of(a, weights);
  Matrix out = (a.value().array().colwise() * weights.value().col(0).array()).matrix();
  return t.record(std::move(out), {a, weights}, [a, weights](Tape& tp, const Matrix& g) {
    if (a.requires_grad()) tp.accumulate(a, (g.array().colwise() * weights.value().col(0).array()).matrix());
    if (weights.requires_grad()) tp.accumulate(weights, g.cwiseProduct(a.value()).rowwise().sum());
  });
}

Var column(const Var& a, Eigen::Index c) {
  if (c < 0 || c >= a.cols()) throw std::out_of_range("column: index out of range");
  Tape& t = tape_of(a);
  return t.record(a.value().col(c), {a}, [a, c](Tape& tp, const Matrix& g) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    d.col(c) = g.col(0);
    tp.accumulate(a, d);
  });
}

Var hstack(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("hstack: no inputs");
  Tape& t = tape_of(parts.front());
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("hstack: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Var> captured(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [captured](Tape& tp, const Matrix& g) {
    Eigen::Index off = 0;
    for (const Var& p : captured) {
      if (p.requires_grad()) tp.accumulate(p, g.middleCols(off, p.cols()));
      off += p.cols();
    }
  });
}

Var concat_cols(const Var& a, const Var& b) {
  const Var parts[] = {a, b};
  return hstack(parts);
}

Var gather_rows(const Var& a, std::span<const int> rows) {
  Tape& t = tape_of(a);
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(rows[i]) + " outside [0, " +
                              std::to_string(a.rows()) + ")");
    }
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  std::vector<int> index(rows.begin(), rows.end());
  return t.record(std::move(out), {a}, [a, index = std::move(index)](Tape& tp, const Matrix& g) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < index.size(); ++i) d.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
    tp.accumulate(a, d);
  });
}

Var softmax_rows(const Var& a) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  const std::size_t self = t.size();
  return t.record(std::move(out), {a}, [a, self](Tape& tp, const Matrix& g) {
    const Matrix& s = tp.value(self);
    // d = s * (g - <g, s>) per row
    Vector inner = g.cwiseProduct(s).rowwise().sum();
    Matrix d = (s.array() * (g.array().colwise() - inner.array())).matrix();
    tp.accumulate(a, d);
  });
}

Var spmm(const SparseMatrix& lhs, const SparseMatrix& lhs_transpose, const Var& x) {
  if (lhs.cols() != x.rows()) {
    throw std::invalid_argument("spmm: operator has " + std::to_string(lhs.cols()) + " columns but input has " +
                                std::to_string(x.rows()) + " rows");
  }
  Tape& t = tape_of(x);
  Matrix out = lhs * x.value();
  return t.record(std::move(out), {x}, [&lhs_transpose, x](Tape& tp, const Matrix& g) {
    tp.accumulate(x, lhs_transpose * g);
  });
}

Var gradient_reversal(const Var& x, double scale) {
  Tape& t = tape_of(x);
  return t.record(x.value(), {x}, [x, scale](Tape& tp, const Matrix& g) { tp.accumulate(x, -scale * g); });
}

Var detach(const Var& x) { return tape_of(x).constant(x.value()); }

Var bce_with_logits(const Var& scores, const Vector& labels) {
  if (scores.cols() != 1 || scores.rows() != labels.size()) {
    throw std::invalid_argument("bce_with_logits: scores must be n x 1 and match labels");
  }
  if (labels.size() == 0) throw std::invalid_argument("bce_with_logits: empty batch");
  Tape& t = tape_of(scores);
  const auto& s = scores.value().col(0).array();
  const auto y = labels.array();
  // max(s,0) - s*y + log1p(exp(-|s|))
  const Eigen::ArrayXd per_row = s.max(0.0) - s * y + (-s.abs()).exp().log1p();
  Matrix out(1, 1);
  out(0, 0) = per_row.mean();
  const double n = static_cast<double>(labels.size());
  return t.record(std::move(out), {scores}, [scores, labels, n](Tape& tp, const Matrix& g) {
    const Eigen::ArrayXd p = 1.0 / (1.0 + (-scores.value().col(0).array()).exp());
    Matrix d = ((p - labels.array()) * (g(0, 0) / n)).matrix();
    tp.accumulate(scores, d);
  });
}

}  // namespace a2dcdr::ad
