#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "a2dcdr/config.hpp"
#include "a2dcdr/disentangle.hpp"
#include "a2dcdr/gradcheck.hpp"
#include "support.hpp"

using namespace a2dcdr;
using a2dcdr::testing::gaussian;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Net whose mean is the mean-head bias and whose log-variance is zero.
VariationalNet constant_net(int d, Rng& rng, const RowVector& mean) {
  VariationalNet net = VariationalNet::make(d, rng);
  net.mean_head.weight.setZero();
  net.mean_head.bias = mean;
  net.logvar_head.weight.setZero();
  net.logvar_head.bias.setZero();
  return net;
}

// Exact expectation of the shuffled estimator over uniform permutations.
double club_expectation(const VariationalNet& net, const Matrix& h_t, const Matrix& h_s) {
  const auto q = net.forward(h_s);
  const Eigen::Index n = h_t.rows();
  double positive = gaussian_log_density(h_t, q.mean, q.log_variance).mean();
  double negative = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Matrix t = h_t.row(j).replicate(n, 1);
    negative += gaussian_log_density(t, q.mean, q.log_variance).mean();
  }
  return positive - negative / static_cast<double>(n);
}

}  // namespace

TEST(Likelihood, DensityAtMean) {
  Rng rng(0);
  const Matrix x = gaussian(5, 6, rng);
  const Vector lp = gaussian_log_density(x, x, Matrix::Zero(5, 6));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(lp(i), -3.0 * kLog2Pi, 1e-12);
}

TEST(Likelihood, OneDimensionalValue) {
  const Vector lp = gaussian_log_density(Matrix::Ones(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  EXPECT_NEAR(lp(0), -0.5 * kLog2Pi - 0.5, 1e-12);
  EXPECT_NEAR(lp(0), -1.4189, 1e-4);
}

TEST(Likelihood, NetAtItsMean) {
  Rng rng(1);
  const RowVector mu = gaussian(1, 4, rng);
  const VariationalNet net = constant_net(4, rng, mu);
  const Matrix h_s = gaussian(6, 4, rng);
  const Matrix h_t = mu.replicate(6, 1);
  EXPECT_NEAR(variational_log_likelihood(net, h_t, h_s), -2.0 * kLog2Pi, 1e-12);
}

TEST(Likelihood, LargerResidualLowersValue) {
  Rng rng(2);
  const VariationalNet net = VariationalNet::make(4, rng);
  const Matrix h_s = gaussian(6, 4, rng);
  const Matrix mean = net.forward(h_s).mean;
  const Matrix residual = gaussian(6, 4, rng);
  EXPECT_GT(variational_log_likelihood(net, mean + residual, h_s),
            variational_log_likelihood(net, mean + 2.0 * residual, h_s));
}

TEST(Likelihood, LogVarianceClamped) {
  Rng rng(3);
  VariationalNet net = VariationalNet::make(3, rng, -2.0, 2.0);
  net.logvar_head.bias.setConstant(50.0);
  EXPECT_LE(net.forward(gaussian(4, 3, rng)).log_variance.maxCoeff(), 2.0);
  net.logvar_head.bias.setConstant(-50.0);
  EXPECT_GE(net.forward(gaussian(4, 3, rng)).log_variance.minCoeff(), -2.0);
  EXPECT_EQ(net.forward(gaussian(4, 3, rng)).mean.cols(), 3);
}

TEST(Likelihood, NonFiniteReportsBatchIndex) {
  Rng rng(4);
  const VariationalNet net = VariationalNet::make(2, rng);
  Matrix h_s = gaussian(3, 2, rng);
  h_s(1, 1) = std::nan("");
  try {
    variational_log_likelihood(net, gaussian(3, 2, rng), h_s, 7);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("batch 7"), std::string::npos);
  }
}

TEST(Club, IdentityPermutationIsZero) {
  Rng rng(5);
  const VariationalNet net = VariationalNet::make(4, rng);
  const Matrix h_t = gaussian(8, 4, rng), h_s = gaussian(8, 4, rng);
  std::vector<int> id(8);
  std::iota(id.begin(), id.end(), 0);
  EXPECT_EQ(club_mi_loss(net, h_t, h_s, id), 0.0);
}

TEST(Club, NeedsTwoRows) {
  Rng rng(6);
  const VariationalNet net = VariationalNet::make(2, rng);
  EXPECT_THROW(club_mi_loss(net, gaussian(1, 2, rng), gaussian(1, 2, rng), rng), std::invalid_argument);
}

TEST(Club, ShufflePermutationIsAPermutation) {
  Rng rng(7);
  auto p = shuffle_permutation(50, rng);
  std::sort(p.begin(), p.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(p[i], i);
}

TEST(Club, RowPermutationInvariantInExpectation) {
  Rng rng(8);
  const VariationalNet net = VariationalNet::make(3, rng);
  const Matrix h_t = gaussian(16, 3, rng), h_s = gaussian(16, 3, rng, 0.5);
  std::vector<int> order(16);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix pt(16, 3), ps(16, 3);
  for (int i = 0; i < 16; ++i) {
    pt.row(i) = h_t.row(order[i]);
    ps.row(i) = h_s.row(order[i]);
  }
  const double exact = club_expectation(net, h_t, h_s);
  EXPECT_NEAR(exact, club_expectation(net, pt, ps), 1e-12);
  const std::array<std::pair<const Matrix*, const Matrix*>, 2> samples{{{&h_t, &h_s}, {&pt, &ps}}};
  for (const auto& [tp, sp] : samples) {
    const Matrix& t = *tp;
    const Matrix& s = *sp;
    std::vector<double> draws;
    for (int k = 0; k < 100; ++k) draws.push_back(club_mi_loss(net, t, s, rng));
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / 100.0;
    double var = 0.0;
    for (double v : draws) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / 99.0 / 100.0);
    EXPECT_LT(std::abs(mean - exact), 5.0 * se + 1e-12);
  }
}

namespace {

// fit on one draw, score on a fresh draw: in-sample scores carry overfitting bias
template <class Draw>
double fitted_estimate(Draw draw, int d, std::uint64_t seed) {
  Rng data(seed + 100), rng(seed);
  const auto [fit_t, fit_s] = draw(data);
  const auto [t, s] = draw(data);
  VariationalNet net = VariationalNet::make(d, rng);
  VariationalFitter fitter(TrainingConfig{}.learning_rate);
  fitter.fit(net, fit_t, fit_s, 200);
  return club_mi_loss(net, t, s, rng);
}

}  // namespace

TEST(Club, IndependentGaussiansNearZero) {
  const auto draw = [](Rng& rng) { return std::pair{gaussian(512, 4, rng), gaussian(512, 4, rng)}; };
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_LT(std::abs(fitted_estimate(draw, 4, seed)), 0.1);
}

TEST(Club, CorrelatedGaussiansAboveHalfTheTrueInformation) {
  const double rho = 0.9;
  const double truth = -0.5 * std::log(1.0 - rho * rho);
  const auto draw = [rho](Rng& rng) {
    const Matrix s = gaussian(512, 1, rng);
    const Matrix t = rho * s + std::sqrt(1.0 - rho * rho) * gaussian(512, 1, rng);
    return std::pair{t, s};
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_GE(fitted_estimate(draw, 1, seed), 0.5 * truth);
}

TEST(Club, FitterOnlyTouchesTheNet) {
  Rng rng(9);
  VariationalNet net = VariationalNet::make(3, rng);
  Matrix h_t = gaussian(32, 3, rng), h_s = gaussian(32, 3, rng);
  const Matrix t0 = h_t, s0 = h_s;
  ConstParameterList before_list;
  net.collect(before_list);
  const std::string before = parameter_hash(before_list);
  const double ll0 = variational_log_likelihood(net, h_t, h_s);
  VariationalFitter fitter(0.01);
  fitter.fit(net, h_t, h_s, 50);
  EXPECT_EQ(h_t, t0);
  EXPECT_EQ(h_s, s0);
  EXPECT_NE(before, parameter_hash(before_list));
  EXPECT_GT(variational_log_likelihood(net, h_t, h_s), ll0);
}

TEST(Club, TapeLossLeavesNetFrozen) {
  Rng rng(10);
  const VariationalNet net = VariationalNet::make(3, rng);
  Matrix h_t = gaussian(8, 3, rng), h_s = gaussian(8, 3, rng);
  const auto perm = shuffle_permutation(8, rng);
  ad::Tape tape;
  ad::Binder bind(tape);
  const ad::Var loss = club_mi_loss(bind, net, bind(h_t), bind(h_s), perm);
  EXPECT_NEAR(loss.scalar(), club_mi_loss(net, h_t, h_s, perm), 1e-12);
  tape.backward(loss);
  EXPECT_TRUE(bind.gradient(net.mean_head.weight).isZero());
  EXPECT_FALSE(bind.gradient(h_t).isZero());
}

TEST(MiWeights, Examples) {
  EXPECT_NEAR(total_mi_loss(10.0, 10.0, 1e-4, 9e-4), 0.01, 1e-15);
  EXPECT_EQ(total_mi_loss(3.0, 4.0, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(total_mi_loss(2.0, -1.0, 0.5, 0.5), 0.5);
}

TEST(Reconstruction, WeightedExample) {
  EXPECT_NEAR(weighted_reconstruction(4.0, 2.0, 0.01, 0.09), 0.22, 1e-15);
}

namespace {

struct ReconFixture {
  Rng rng{11};
  int d = 8;
  int n = 32;
  std::array<Reconstructor, 2> recon{make_reconstructor(8, rng), make_reconstructor(8, rng)};
  DisentangledBatch batch;
  RawUserRows raw;
  ReconFixture() {
    for (int di = 0; di < 2; ++di) {
      batch.h_t[di] = gaussian(n, d, rng);
      batch.h_s[di] = gaussian(n, d, rng);
      raw.u_t[di] = gaussian(n, d, rng);
      raw.u_s[di] = gaussian(n, d, rng);
    }
  }
};

}  // namespace

TEST(Reconstruction, ZeroIffExact) {
  ReconFixture f;
  for (int di = 0; di < 2; ++di) {
    Matrix in(f.n, 2 * f.d);
    in << f.batch.h_t[di], f.batch.h_s[di];
    const Matrix out = f.recon[di].forward(in);
    f.raw.u_t[di] = out.leftCols(f.d);
    f.raw.u_s[di] = out.rightCols(f.d);
  }
  EXPECT_NEAR(reconstruction_loss(f.recon, f.batch, f.raw, 0.01, 0.09), 0.0, 1e-20);
  f.raw.u_s[1](0, 0) += 1.0;
  EXPECT_GT(reconstruction_loss(f.recon, f.batch, f.raw, 0.01, 0.09), 0.0);
}

TEST(Reconstruction, MatchesPerDomainMeanSquaredError) {
  ReconFixture f;
  double expected = 0.0;
  const double gammas[2] = {0.3, 0.7};
  for (int di = 0; di < 2; ++di) {
    Matrix in(f.n, 2 * f.d), target(f.n, 2 * f.d);
    in << f.batch.h_t[di], f.batch.h_s[di];
    target << f.raw.u_t[di], f.raw.u_s[di];
    expected += gammas[di] * (f.recon[di].forward(in) - target).rowwise().squaredNorm().mean();
  }
  EXPECT_NEAR(reconstruction_loss(f.recon, f.batch, f.raw, 0.3, 0.7), expected, 1e-12);
  f.raw.u_t[0] = Matrix::Zero(f.n, f.d + 1);
  EXPECT_THROW(reconstruction_loss(f.recon, f.batch, f.raw, 0.3, 0.7), std::invalid_argument);
}

TEST(Reconstruction, OverfitsOneBatch) {
  ReconFixture f;
  const double initial = reconstruction_loss(f.recon, f.batch, f.raw, 1.0, 1.0);
  Adam adam(0.001);
  ParameterList params;
  for (auto& r : f.recon) r.collect(params);
  for (int step = 0; step < 500; ++step) {
    ad::Tape tape;
    ad::Binder bind(tape);
    const DisentangledVars vars{{tape.constant(f.batch.h_t[0]), tape.constant(f.batch.h_t[1])},
                                {tape.constant(f.batch.h_s[0]), tape.constant(f.batch.h_s[1])}};
    const auto terms = reconstruction_loss(bind, f.recon, vars, f.raw, 1.0, 1.0);
    tape.backward(terms.total);
    adam.step(params, gradients_of(bind, params));
  }
  EXPECT_LE(reconstruction_loss(f.recon, f.batch, f.raw, 1.0, 1.0), 0.1 * initial);
}

TEST(Reconstruction, TargetsReceiveNoGradient) {
  ReconFixture f;
  ad::Tape tape;
  ad::Binder bind(tape);
  const DisentangledVars vars{{bind(f.batch.h_t[0]), bind(f.batch.h_t[1])}, {bind(f.batch.h_s[0]), bind(f.batch.h_s[1])}};
  const auto terms = reconstruction_loss(bind, f.recon, vars, f.raw, 1.0, 1.0);
  tape.backward(terms.total);
  EXPECT_TRUE(bind.gradient(f.raw.u_t[0]).isZero());
  EXPECT_FALSE(bind.gradient(f.batch.h_t[0]).isZero());
}

TEST(Disentangle, GradientsAtD4N8) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    GradCheckOptions options;
    options.n = 8;
    options.seed = seed;
    for (const auto& r : run_gradient_checks(options)) {
      if (r.suite != "club" && r.suite != "club_likelihood" && r.suite != "reconstruction") continue;
      EXPECT_LT(r.worst_relative_error, 1e-3) << r.suite << " " << r.worst_probe;
    }
  }
}
