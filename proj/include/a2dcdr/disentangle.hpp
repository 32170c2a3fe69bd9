#pragma once

// Intra-domain disentanglement: a variational conditional q(h_t | h_s) used
// for a contrastive log-ratio upper bound on mutual information, and the
// feature reconstructor that maps (h_t, h_s) back to the raw embeddings.

#include <array>
#include <span>
#include <vector>

#include "a2dcdr/autodiff.hpp"
#include "a2dcdr/nn.hpp"
#include "a2dcdr/representations.hpp"

namespace a2dcdr {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 2d hidden units, floored: a 2-unit rectifier trunk at d = 1 dies on half the input line
inline constexpr int kMinVariationalWidth = 8;
inline constexpr int variational_width(int d) { return 2 * d < kMinVariationalWidth ? kMinVariationalWidth : 2 * d; }

// Diagonal Gaussian over h_t conditioned on h_s.
struct VariationalNet {
  Mlp trunk;  // d -> w -> w with w = variational_width(d), rectified
  Linear mean_head;
  Linear logvar_head;
  double logvar_min = -10.0;
  double logvar_max = 10.0;

  static VariationalNet make(int d, Rng& rng, double logvar_min = -10.0, double logvar_max = 10.0);
  int dim() const { return static_cast<int>(mean_head.weight.cols()); }

  struct Moments {
    Matrix mean;
    Matrix log_variance;
  };
  Moments forward(const Matrix& h_s) const;

  struct MomentVars {
    ad::Var mean;
    ad::Var log_variance;
  };
  MomentVars forward(ad::Binder& bind, const ad::Var& h_s) const;

  void collect(ParameterList& out);
  void collect(ConstParameterList& out) const;
};

// Mean over rows of log N(h_t; mean(h_s), exp(log_variance(h_s))).
double variational_log_likelihood(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s,
                                  int batch_index = -1);
ad::Var variational_log_likelihood(ad::Binder& bind, const VariationalNet& net, const ad::Var& h_t,
                                   const ad::Var& h_s);

// Per-row Gaussian log-density under given moments (no network).
Vector gaussian_log_density(const Matrix& x, const Matrix& mean, const Matrix& log_variance);

// Uniform random permutation of [0, n); fixed points allowed.
std::vector<int> shuffle_permutation(int n, Rng& rng);

// mean_i [log q(h_t_i | h_s_i) - log q(h_t_perm(i) | h_s_i)].
double club_mi_loss(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s, std::span<const int> permutation);
double club_mi_loss(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s, Rng& rng);

// Tape version with the network frozen: gradients reach h_t and h_s only.
ad::Var club_mi_loss(ad::Binder& bind, const VariationalNet& net, const ad::Var& h_t, const ad::Var& h_s,
                     std::span<const int> permutation);

// Inner CLUB loop: likelihood ascent on the net with h_t, h_s held fixed.
class VariationalFitter {
 public:
  explicit VariationalFitter(double learning_rate) : adam_(learning_rate) {}
  // Runs `steps` updates; returns the log-likelihood before the last update.
  double fit(VariationalNet& net, const Matrix& h_t, const Matrix& h_s, int steps);

 private:
  Adam adam_;
};

inline double total_mi_loss(double loss_a, double loss_b, double beta_a, double beta_b) {
  return beta_a * loss_a + beta_b * loss_b;
}

// 2d -> 256 -> 2d, rectified hidden layer.
using Reconstructor = Mlp;
inline constexpr int kReconstructorHidden = 256;
Reconstructor make_reconstructor(int d, Rng& rng);

// Raw (pre-encoder) embedding rows per domain, row-aligned with the batch.
struct RawUserRows {
  std::array<Matrix, 2> u_t;
  std::array<Matrix, 2> u_s;
};

struct ReconstructionTerms {
  ad::Var total;
  std::array<ad::Var, 2> mean_squared;  // unweighted per-domain mean ||u_hat - u||^2
};

// Targets enter as constants: no gradient reaches the raw rows through this loss.
ReconstructionTerms reconstruction_loss(ad::Binder& bind, const std::array<Reconstructor, 2>& recon,
                                        const DisentangledVars& batch, const RawUserRows& raw, double gamma_a,
                                        double gamma_b);
double reconstruction_loss(const std::array<Reconstructor, 2>& recon, const DisentangledBatch& batch,
                           const RawUserRows& raw, double gamma_a, double gamma_b);

inline double weighted_reconstruction(double mse_a, double mse_b, double gamma_a, double gamma_b) {
  return gamma_a * mse_a + gamma_b * mse_b;
}

}  // namespace a2dcdr
