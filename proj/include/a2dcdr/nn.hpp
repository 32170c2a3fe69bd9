#pragma once

#include <string>
#include <vector>

#include "a2dcdr/autodiff.hpp"
#include "a2dcdr/data.hpp"

namespace a2dcdr {

using ParameterList = std::vector<Matrix*>;
using ConstParameterList = std::vector<const Matrix*>;

struct Linear {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out

  static Linear glorot(int in, int out, Rng& rng);
  ad::Var forward(ad::Binder& bind, const ad::Var& x) const;
  Matrix forward(const Matrix& x) const;
};

// Feedforward stack with a rectifier after every layer except (optionally) the last.
struct Mlp {
  std::vector<Linear> layers;
  bool relu_on_output = false;

  static Mlp make(const std::vector<int>& widths, Rng& rng, bool relu_on_output = false);
  ad::Var forward(ad::Binder& bind, const ad::Var& x) const;
  Matrix forward(const Matrix& x) const;
  int input_dim() const { return static_cast<int>(layers.front().weight.rows()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.cols()); }
  void collect(ParameterList& out);
  void collect(ConstParameterList& out) const;
};

// First-order adaptive-moment optimizer with per-parameter moment slots.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  void step(const ParameterList& params, const std::vector<Matrix>& grads);
  long steps() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, epsilon_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

// Rescales grads in place so their joint L2 norm is at most max_norm; returns the pre-clip norm.
double clip_global_norm(std::vector<Matrix>& grads, double max_norm);

// FNV-1a over the raw bytes of every matrix (shape included).
std::string parameter_hash(const ConstParameterList& params);

std::vector<Matrix> gradients_of(const ad::Binder& bind, const ParameterList& params);

}  // namespace a2dcdr
