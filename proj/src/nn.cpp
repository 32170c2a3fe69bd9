#include "a2dcdr/nn.hpp"

#include <cmath>

namespace a2dcdr {

Linear Linear::glorot(int in, int out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Linear layer;
  layer.weight.resize(in, out);
  for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
  layer.bias = Matrix::Zero(1, out);
  return layer;
}

ad::Var Linear::forward(ad::Binder& bind, const ad::Var& x) const {
  return ad::add_row_bias(ad::matmul(x, bind(weight)), bind(bias));
}

Matrix Linear::forward(const Matrix& x) const {
  Matrix out = x * weight;
  out.rowwise() += bias.row(0);
  return out;
}

Mlp Mlp::make(const std::vector<int>& widths, Rng& rng, bool relu_on_output) {
  Mlp net;
  net.relu_on_output = relu_on_output;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) net.layers.push_back(Linear::glorot(widths[i], widths[i + 1], rng));
  return net;
}

ad::Var Mlp::forward(ad::Binder& bind, const ad::Var& x) const {
  ad::Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].forward(bind, h);
    if (i + 1 < layers.size() || relu_on_output) h = ad::relu(h);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].forward(h);
    if (i + 1 < layers.size() || relu_on_output) h = h.cwiseMax(0.0);
  }
  return h;
}

void Mlp::collect(ParameterList& out) {
  for (auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
}

void Mlp::collect(ConstParameterList& out) const {
  for (const auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
}

void Adam::step(const ParameterList& params, const std::vector<Matrix>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam::step: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: parameter set changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params[i]->array() -= lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + epsilon_);
  }
}

double clip_global_norm(std::vector<Matrix>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& g : grads) g *= factor;
  }
  return norm;
}

std::string parameter_hash(const ConstParameterList& params) {
  std::string bytes;
  for (const Matrix* p : params) {
    const Eigen::Index shape[2] = {p->rows(), p->cols()};
    bytes.append(reinterpret_cast<const char*>(shape), sizeof(shape));
    bytes.append(reinterpret_cast<const char*>(p->data()), static_cast<std::size_t>(p->size()) * sizeof(double));
  }
  return fnv1a_hex(bytes);
}

std::vector<Matrix> gradients_of(const ad::Binder& bind, const ParameterList& params) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const Matrix* p : params) grads.push_back(bind.gradient(*p));
  return grads;
}

}  // namespace a2dcdr
