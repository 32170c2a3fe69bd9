#include "a2dcdr/fusion_scoring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace a2dcdr {

FusedUserRep tafc_fuse(const Vector& h_v, const RepTriple& reps) {
  const Eigen::Index d = h_v.size();
  if (d < 1) throw std::invalid_argument("tafc_fuse: empty item vector");
  for (const auto& r : reps) {
    if (r.size() != d) {
      throw std::invalid_argument("tafc_fuse: representation dimension " + std::to_string(r.size()) +
                                  " does not match item dimension " + std::to_string(d));
    }
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::array<double, 3> logits{};
  for (int k = 0; k < 3; ++k) logits[k] = h_v.dot(reps[k]) * inv_sqrt_d;
  const double top = std::max({logits[0], logits[1], logits[2]});
  double total = 0.0;
  FusedUserRep out;
  for (int k = 0; k < 3; ++k) {
    out.attention_weights[k] = std::exp(logits[k] - top);
    total += out.attention_weights[k];
  }
  out.e = Vector::Zero(d);
  for (int k = 0; k < 3; ++k) {
    out.attention_weights[k] /= total;
    out.e += out.attention_weights[k] * reps[k];
  }
  return out;
}

Vector sum_pool(const RepTriple& reps) { return reps[0] + reps[1] + reps[2]; }

double predict(const Vector& e, const Vector& h_v) {
  if (e.size() != h_v.size()) throw std::invalid_argument("predict: dimension mismatch");
  return e.dot(h_v);
}

double bce_loss(std::span<const double> scores, std::span<const double> labels) {
  if (scores.empty()) throw std::invalid_argument("bce_loss: empty batch");
  if (scores.size() != labels.size()) throw std::invalid_argument("bce_loss: scores and labels differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    total += std::max(s, 0.0) - s * labels[i] + std::log1p(std::exp(-std::abs(s)));
  }
  return total / static_cast<double>(scores.size());
}

Vector score_candidates(const Matrix& items, const RepTriple& reps, bool attention) {
  const Eigen::Index d = items.cols();
  Matrix r(3, d);
  for (int k = 0; k < 3; ++k) {
    if (reps[k].size() != d) throw std::invalid_argument("score_candidates: representation dimension mismatch");
    r.row(k) = reps[k].transpose();
  }
  if (!attention) return items * r.colwise().sum().transpose();
  Matrix logits = items * r.transpose() / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    logits.row(i) = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    logits.row(i) /= logits.row(i).sum();
  }
  const Matrix fused = logits * r;
  return fused.cwiseProduct(items).rowwise().sum();
}

ad::Var fused_scores(const ad::Var& items, const std::array<ad::Var, 3>& reps, bool attention) {
  for (const auto& rep : reps) {
    if (rep.rows() != items.rows() || rep.cols() != items.cols()) {
      throw std::invalid_argument("fused_scores: representation block shape does not match items");
    }
  }
  if (!attention) return ad::rowwise_dot(reps[0] + reps[1] + reps[2], items);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(items.cols()));
  const std::array<ad::Var, 3> logits{ad::scale(ad::rowwise_dot(items, reps[0]), inv_sqrt_d),
                                      ad::scale(ad::rowwise_dot(items, reps[1]), inv_sqrt_d),
                                      ad::scale(ad::rowwise_dot(items, reps[2]), inv_sqrt_d)};
  const ad::Var weights = ad::softmax_rows(ad::hstack(logits));
  ad::Var fused = ad::scale_rows(reps[0], ad::column(weights, 0));
  fused = fused + ad::scale_rows(reps[1], ad::column(weights, 1));
  fused = fused + ad::scale_rows(reps[2], ad::column(weights, 2));
  return ad::rowwise_dot(fused, items);
}

}  // namespace a2dcdr
