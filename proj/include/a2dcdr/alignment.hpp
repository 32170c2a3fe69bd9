#pragma once

// Inter-domain feature adaptation: kernel two-sample discrepancy, gradient
// reversal and the domain-constrained alignment loss.

#include <array>
#include <vector>

#include "a2dcdr/autodiff.hpp"
#include "a2dcdr/config.hpp"
#include "a2dcdr/nn.hpp"
#include "a2dcdr/representations.hpp"

namespace a2dcdr {

// Absolute RBF sigmas for this pair of samples. With the median heuristic the
// base is sqrt(median pairwise squared distance) over the pooled rows
// (falls back to 1 when all rows coincide).
std::vector<double> resolve_bandwidths(const Matrix& x, const Matrix& y, const KernelConfig& kernel);

// Biased (V-statistic) squared MMD over a sum of RBF kernels with the given
// absolute sigmas. Row order of either sample and the order of the pair do
// not change the result bit for bit. Optional outputs receive the gradient.
double mmd_squared(const Matrix& x, const Matrix& y, const std::vector<double>& sigmas, Matrix* grad_x = nullptr,
                   Matrix* grad_y = nullptr);

// sqrt(max(mmd_squared, 0)).
double mmd(const Matrix& x, const Matrix& y, const KernelConfig& kernel);

// Bandwidths are resolved from the forward values and treated as constants.
ad::Var mmd(const ad::Var& x, const ad::Var& y, const KernelConfig& kernel);

// Plain-value counterpart of ad::gradient_reversal: identity forward; its
// backward multiplies the incoming gradient by -scale.
inline Matrix gradient_reversal(const Matrix& x, double /*scale*/) { return x; }

// d -> 64 -> d with a rectifier on the hidden layer.
using ProjectorHead = Mlp;
inline constexpr int kProjectorHidden = 64;
ProjectorHead make_projector(int d, Rng& rng);

struct DcMmdTerms {
  ad::Var total;
  ad::Var aligned;     // mmd(h_t^A, h_t^B)
  ad::Var specific_b;  // mmd(h_t^A, G_B(GRL(h_s^B)))
  ad::Var specific_a;  // mmd(h_t^B, G_A(GRL(h_s^A))); unset unless symmetric
};

DcMmdTerms dc_mmd_loss(ad::Binder& bind, const DisentangledVars& batch, const std::array<ProjectorHead, 2>& projectors,
                       const KernelConfig& kernel, bool symmetric, double grl_scale = 1.0);

// Forward-only value of the same loss.
double dc_mmd_loss(const DisentangledBatch& batch, const std::array<ProjectorHead, 2>& projectors,
                   const KernelConfig& kernel, bool symmetric);

}  // namespace a2dcdr
