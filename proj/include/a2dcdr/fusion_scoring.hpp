#pragma once

// Candidate-aware fusion of the three user representations, dot-product
// scoring and the logistic cross-entropy objective.

#include <array>
#include <span>

#include "a2dcdr/autodiff.hpp"

namespace a2dcdr {

// Ordered (cross-domain h_t, own h_t, own h_s).
using RepTriple = std::array<Vector, 3>;

struct FusedUserRep {
  Vector e;
  std::array<double, 3> attention_weights{};
};

// Softmax over the three scaled dot products <h_v, rep_k> / sqrt(d), normalized
// jointly; e is the weight-averaged representation.
FusedUserRep tafc_fuse(const Vector& h_v, const RepTriple& reps);

// Unweighted sum of the triple (the ablation without attention).
Vector sum_pool(const RepTriple& reps);

double predict(const Vector& e, const Vector& h_v);

// Negative mean log-likelihood of labels under logistic(scores).
double bce_loss(std::span<const double> scores, std::span<const double> labels);

inline double domain_ce_sum(double loss_a, double loss_b) { return loss_a + loss_b; }

// Scores n candidate items (rows of `items`) for one user.
Vector score_candidates(const Matrix& items, const RepTriple& reps, bool attention);

// Tape version over row-aligned batches: row i of each rep belongs to the
// user of labeled pair i, row i of `items` to its item. Returns n x 1 logits.
ad::Var fused_scores(const ad::Var& items, const std::array<ad::Var, 3>& reps, bool attention);

}  // namespace a2dcdr
