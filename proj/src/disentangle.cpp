#include "a2dcdr/disentangle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace a2dcdr {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_aligned(const Matrix& h_t, const Matrix& h_s, int d, const char* op) {
  if (h_t.rows() != h_s.rows()) throw std::invalid_argument(std::string(op) + ": h_t and h_s are not row-aligned");
  if (h_t.cols() != d || h_s.cols() != d) {
    throw std::invalid_argument(std::string(op) + ": expected dimension " + std::to_string(d));
  }
}

ad::Var log_density_rows(const ad::Var& x, const ad::Var& mean, const ad::Var& log_variance) {
  const ad::Var inv_var = ad::exp(ad::scale(log_variance, -1.0));
  const ad::Var mahalanobis = ad::cwise_mul(ad::square(x - mean), inv_var);
  const ad::Var per_dim = ad::add_scalar(mahalanobis + log_variance, kLog2Pi);
  return ad::scale(ad::row_sum(per_dim), -0.5);
}

}  // namespace

VariationalNet VariationalNet::make(int d, Rng& rng, double logvar_min, double logvar_max) {
  VariationalNet net;
  const int width = variational_width(d);
  net.trunk = Mlp::make({d, width, width}, rng, /*relu_on_output=*/true);
  net.mean_head = Linear::glorot(width, d, rng);
  net.logvar_head = Linear::glorot(width, d, rng);
  net.logvar_min = logvar_min;
  net.logvar_max = logvar_max;
  return net;
}

VariationalNet::Moments VariationalNet::forward(const Matrix& h_s) const {
  const Matrix hidden = trunk.forward(h_s);
  return {mean_head.forward(hidden), logvar_head.forward(hidden).cwiseMax(logvar_min).cwiseMin(logvar_max)};
}

VariationalNet::MomentVars VariationalNet::forward(ad::Binder& bind, const ad::Var& h_s) const {
  const ad::Var hidden = trunk.forward(bind, h_s);
  return {mean_head.forward(bind, hidden), ad::clamp(logvar_head.forward(bind, hidden), logvar_min, logvar_max)};
}

void VariationalNet::collect(ParameterList& out) {
  trunk.collect(out);
  for (Linear* l : {&mean_head, &logvar_head}) {
    out.push_back(&l->weight);
    out.push_back(&l->bias);
  }
}

void VariationalNet::collect(ConstParameterList& out) const {
  trunk.collect(out);
  for (const Linear* l : {&mean_head, &logvar_head}) {
    out.push_back(&l->weight);
    out.push_back(&l->bias);
  }
}

Vector gaussian_log_density(const Matrix& x, const Matrix& mean, const Matrix& log_variance) {
  const auto per_dim = (x - mean).array().square() * (-log_variance.array()).exp() + log_variance.array() + kLog2Pi;
  return -0.5 * per_dim.rowwise().sum().matrix();
}

double variational_log_likelihood(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s, int batch_index) {
  require_aligned(h_t, h_s, net.dim(), "variational_log_likelihood");
  const auto moments = net.forward(h_s);
  const Vector rows = gaussian_log_density(h_t, moments.mean, moments.log_variance);
  const double value = rows.mean();
  if (!std::isfinite(value) || !moments.mean.allFinite()) {
    throw NumericalError("variational_log_likelihood: non-finite activations in batch " + std::to_string(batch_index));
  }
  return value;
}

ad::Var variational_log_likelihood(ad::Binder& bind, const VariationalNet& net, const ad::Var& h_t,
                                   const ad::Var& h_s) {
  require_aligned(h_t.value(), h_s.value(), net.dim(), "variational_log_likelihood");
  const auto moments = net.forward(bind, h_s);
  return ad::mean(log_density_rows(h_t, moments.mean, moments.log_variance));
}

std::vector<int> shuffle_permutation(int n, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

double club_mi_loss(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s, std::span<const int> permutation) {
  require_aligned(h_t, h_s, net.dim(), "club_mi_loss");
  if (h_t.rows() < 2) throw std::invalid_argument("club_mi_loss: need at least two rows to shuffle");
  if (permutation.size() != static_cast<std::size_t>(h_t.rows())) {
    throw std::invalid_argument("club_mi_loss: permutation length does not match batch");
  }
  const auto moments = net.forward(h_s);
  Matrix shuffled(h_t.rows(), h_t.cols());
  for (Eigen::Index i = 0; i < h_t.rows(); ++i) shuffled.row(i) = h_t.row(permutation[static_cast<std::size_t>(i)]);
  const Vector positive = gaussian_log_density(h_t, moments.mean, moments.log_variance);
  const Vector negative = gaussian_log_density(shuffled, moments.mean, moments.log_variance);
  return (positive - negative).mean();
}

double club_mi_loss(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s, Rng& rng) {
  if (h_t.rows() < 2) throw std::invalid_argument("club_mi_loss: need at least two rows to shuffle");
  const auto perm = shuffle_permutation(static_cast<int>(h_t.rows()), rng);
  return club_mi_loss(net, h_t, h_s, perm);
}

ad::Var club_mi_loss(ad::Binder& bind, const VariationalNet& net, const ad::Var& h_t, const ad::Var& h_s,
                     std::span<const int> permutation) {
  require_aligned(h_t.value(), h_s.value(), net.dim(), "club_mi_loss");
  if (h_t.rows() < 2) throw std::invalid_argument("club_mi_loss: need at least two rows to shuffle");
  if (permutation.size() != static_cast<std::size_t>(h_t.rows())) {
    throw std::invalid_argument("club_mi_loss: permutation length does not match batch");
  }
  ConstParameterList params;
  net.collect(params);
  for (const Matrix* p : params) bind.freeze(*p);
  const auto moments = net.forward(bind, h_s);
  const ad::Var positive = log_density_rows(h_t, moments.mean, moments.log_variance);
  const ad::Var negative = log_density_rows(ad::gather_rows(h_t, permutation), moments.mean, moments.log_variance);
  return ad::mean(positive - negative);
}

double VariationalFitter::fit(VariationalNet& net, const Matrix& h_t, const Matrix& h_s, int steps) {
  ParameterList params;
  net.collect(params);
  double last = 0.0;
  for (int s = 0; s < steps; ++s) {
    ad::Tape tape;
    ad::Binder bind(tape);
    const ad::Var ll = variational_log_likelihood(bind, net, tape.constant(h_t), tape.constant(h_s));
    last = ll.scalar();
    if (!std::isfinite(last)) throw NumericalError("CLUB inner loop: non-finite log-likelihood at step " + std::to_string(s));
    tape.backward(ad::scale(ll, -1.0));
    adam_.step(params, gradients_of(bind, params));
  }
  return last;
}

Reconstructor make_reconstructor(int d, Rng& rng) { return Mlp::make({2 * d, kReconstructorHidden, 2 * d}, rng); }

ReconstructionTerms reconstruction_loss(ad::Binder& bind, const std::array<Reconstructor, 2>& recon,
                                        const DisentangledVars& batch, const RawUserRows& raw, double gamma_a,
                                        double gamma_b) {
  ReconstructionTerms terms;
  ad::Tape& tape = bind.tape();
  for (int di = 0; di < 2; ++di) {
    const ad::Var input = ad::concat_cols(batch.h_t[di], batch.h_s[di]);
    Matrix target(raw.u_t[di].rows(), raw.u_t[di].cols() + raw.u_s[di].cols());
    target << raw.u_t[di], raw.u_s[di];
    if (target.rows() != input.rows() || target.cols() != recon[di].output_dim() ||
        input.cols() != recon[di].input_dim()) {
      throw std::invalid_argument("reconstruction_loss: dimension mismatch between batch, raw rows and reconstructor");
    }
    const ad::Var residual = recon[di].forward(bind, input) - tape.constant(std::move(target));
    terms.mean_squared[di] = ad::scale(ad::sum(ad::square(residual)), 1.0 / static_cast<double>(input.rows()));
  }
  terms.total = ad::scale(terms.mean_squared[0], gamma_a) + ad::scale(terms.mean_squared[1], gamma_b);
  return terms;
}

double reconstruction_loss(const std::array<Reconstructor, 2>& recon, const DisentangledBatch& batch,
                           const RawUserRows& raw, double gamma_a, double gamma_b) {
  std::array<double, 2> mse{};
  for (int di = 0; di < 2; ++di) {
    Matrix input(batch.h_t[di].rows(), batch.h_t[di].cols() + batch.h_s[di].cols());
    input << batch.h_t[di], batch.h_s[di];
    Matrix target(raw.u_t[di].rows(), raw.u_t[di].cols() + raw.u_s[di].cols());
    target << raw.u_t[di], raw.u_s[di];
    if (target.rows() != input.rows() || target.cols() != recon[di].output_dim() ||
        input.cols() != recon[di].input_dim()) {
      throw std::invalid_argument("reconstruction_loss: dimension mismatch between batch, raw rows and reconstructor");
    }
    mse[di] = (recon[di].forward(input) - target).squaredNorm() / static_cast<double>(input.rows());
  }
  return weighted_reconstruction(mse[0], mse[1], gamma_a, gamma_b);
}

}  // namespace a2dcdr
