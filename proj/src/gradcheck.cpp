#include "a2dcdr/gradcheck.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "a2dcdr/alignment.hpp"
#include "a2dcdr/disentangle.hpp"
#include "a2dcdr/fusion_scoring.hpp"
#include "a2dcdr/graph_encoders.hpp"
#include "a2dcdr/training.hpp"

namespace a2dcdr {

namespace {

double evaluate(const Objective& objective) {
  ad::Tape tape;
  ad::Binder bind(tape);
  return objective(bind).scalar();
}

// Analytic gradients of `analytic` against central differences of `numeric`.
std::vector<ProbeError> compare(const Objective& analytic, const Objective& numeric, std::span<const Probe> probes,
                                double step) {
  std::vector<Matrix> grads;
  {
    ad::Tape tape;
    ad::Binder bind(tape);
    const ad::Var loss = analytic(bind);
    tape.backward(loss);
    for (const auto& p : probes) grads.push_back(bind.gradient(*p.target));
  }
  std::vector<ProbeError> out;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    Matrix& m = *probes[k].target;
    Matrix fd(m.rows(), m.cols());
    const double f0 = evaluate(numeric);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      // a rectifier kink inside [x - h, x + h] shows as a second difference of
      // order h rather than h^2; shrink the step until the interval is clear
      double h = step;
      for (int attempt = 0;; ++attempt) {
        m.data()[i] = saved + h;
        const double up = evaluate(numeric);
        m.data()[i] = saved - h;
        const double down = evaluate(numeric);
        m.data()[i] = saved;
        fd.data()[i] = (up - down) / (2.0 * h);
        const double curvature = std::abs(up + down - 2.0 * f0);
        if (attempt == 3 || curvature <= 1e-4 * h * std::max(1.0, std::abs(fd.data()[i]))) break;
        h /= 8.0;
      }
    }
    fd *= probes[k].sign;
    const double scale = std::max({grads[k].norm(), fd.norm(), 1e-8});
    out.push_back({probes[k].name, (grads[k] - fd).norm() / scale});
  }
  return out;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Zero biases put rectifiers exactly on their kink for dead rows; nudge every
// network parameter off the initialization.
template <typename Net>
Net jittered(Net net, Rng& rng) {
  ParameterList params;
  net.collect(params);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (Matrix* p : params)
    for (Eigen::Index i = 0; i < p->size(); ++i) p->data()[i] += normal(rng);
  return net;
}

void add_network(std::vector<Probe>& probes, const std::string& prefix, ParameterList params) {
  for (std::size_t i = 0; i < params.size(); ++i) probes.push_back({prefix + "[" + std::to_string(i) + "]", params[i]});
}

GradCheckResult summarize(const std::string& suite, const std::vector<ProbeError>& errors, double tolerance) {
  GradCheckResult r{suite, "", 0.0, true};
  for (const auto& e : errors) {
    if (e.relative_error >= r.worst_relative_error) {
      r.worst_relative_error = e.relative_error;
      r.worst_probe = e.name;
    }
  }
  r.passed = r.worst_relative_error < tolerance;
  return r;
}

// Five users, four items per domain; every user has two train items in each.
DomainDataset tiny_dataset() {
  DomainDataset ds;
  ds.user_count = 5;
  ds.item_counts = {4, 4};
  for (int u = 0; u < ds.user_count; ++u) {
    ds.train[0].push_back({u, u % 4});
    ds.train[0].push_back({u, (u + 1) % 4});
    ds.train[1].push_back({u, (u + 2) % 4});
    ds.train[1].push_back({u, (u + 3) % 4});
    ds.user_ids.push_back("u" + std::to_string(u));
  }
  for (int di = 0; di < 2; ++di)
    for (int i = 0; i < 4; ++i) ds.item_ids[di].push_back("i" + std::to_string(i));
  ds.finalize();
  return ds;
}

}  // namespace

std::vector<ProbeError> probe_errors(const Objective& objective, std::span<const Probe> probes, double step) {
  return compare(objective, objective, probes, step);
}

std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& options) {
  const int d = options.d;
  const int n = options.n;
  Rng rng(options.seed);
  std::vector<GradCheckResult> results;
  auto record = [&](const std::string& suite, const std::vector<ProbeError>& errors) {
    results.push_back(summarize(suite, errors, options.tolerance));
  };

  {
    const double grl_scale = 0.5;
    std::array<Matrix, 2> h_t{gaussian(n, d, rng), gaussian(n, d, rng)};
    std::array<Matrix, 2> h_s{gaussian(n, d, rng), gaussian(n, d, rng)};
    std::array<ProjectorHead, 2> projectors{jittered(make_projector(d, rng), rng), jittered(make_projector(d, rng), rng)};
    KernelConfig kernel{false, {1.0, 2.0, 4.0}};
    const Objective objective = [&](ad::Binder& bind) {
      DisentangledVars vars{{bind(h_t[0]), bind(h_t[1])}, {bind(h_s[0]), bind(h_s[1])}};
      return dc_mmd_loss(bind, vars, projectors, kernel, true, grl_scale).total;
    };
    std::vector<Probe> probes{{"h_t_A", &h_t[0]}, {"h_t_B", &h_t[1]},
                              {"h_s_A", &h_s[0], -grl_scale}, {"h_s_B", &h_s[1], -grl_scale}};
    for (int di = 0; di < 2; ++di) {
      ParameterList params;
      projectors[di].collect(params);
      add_network(probes, std::string("projector_") + name_of(kDomains[di]), params);
    }
    record("dc_mmd", probe_errors(objective, probes, options.step));
  }

  {
    const double scale = 1.7;
    Matrix x = gaussian(n, d, rng);
    const Matrix c = gaussian(n, d, rng);
    const Objective objective = [&](ad::Binder& bind) {
      return ad::sum(ad::cwise_mul(ad::gradient_reversal(bind(x), scale), bind.tape().constant(c)));
    };
    const std::vector<Probe> probes{{"x", &x, -scale}};
    record("gradient_reversal", probe_errors(objective, probes, options.step));
  }

  {
    VariationalNet net = jittered(VariationalNet::make(d, rng), rng);
    Matrix h_t = gaussian(n, d, rng);
    Matrix h_s = gaussian(n, d, rng);
    const std::vector<int> perm = shuffle_permutation(n, rng);
    const Objective club = [&](ad::Binder& bind) { return club_mi_loss(bind, net, bind(h_t), bind(h_s), perm); };
    const std::vector<Probe> inputs{{"h_t", &h_t}, {"h_s", &h_s}};
    record("club", probe_errors(club, inputs, options.step));

    const Objective likelihood = [&](ad::Binder& bind) {
      return variational_log_likelihood(bind, net, bind.tape().constant(h_t), bind.tape().constant(h_s));
    };
    std::vector<Probe> params;
    ParameterList list;
    net.collect(list);
    add_network(params, "variational", list);
    record("club_likelihood", probe_errors(likelihood, params, options.step));
  }

  {
    std::array<Reconstructor, 2> recon{jittered(make_reconstructor(d, rng), rng), jittered(make_reconstructor(d, rng), rng)};
    std::array<Matrix, 2> h_t{gaussian(n, d, rng), gaussian(n, d, rng)};
    std::array<Matrix, 2> h_s{gaussian(n, d, rng), gaussian(n, d, rng)};
    RawUserRows raw{{gaussian(n, d, rng), gaussian(n, d, rng)}, {gaussian(n, d, rng), gaussian(n, d, rng)}};
    const Objective objective = [&](ad::Binder& bind) {
      DisentangledVars vars{{bind(h_t[0]), bind(h_t[1])}, {bind(h_s[0]), bind(h_s[1])}};
      return reconstruction_loss(bind, recon, vars, raw, 0.3, 0.7).total;
    };
    std::vector<Probe> probes{{"h_t_A", &h_t[0]}, {"h_t_B", &h_t[1]}, {"h_s_A", &h_s[0]}, {"h_s_B", &h_s[1]}};
    for (int di = 0; di < 2; ++di) {
      ParameterList params;
      recon[di].collect(params);
      add_network(probes, std::string("reconstructor_") + name_of(kDomains[di]), params);
    }
    record("reconstruction", probe_errors(objective, probes, options.step));
  }

  for (const bool attention : {true, false}) {
    Matrix items = gaussian(n, d, rng);
    std::array<Matrix, 3> reps{gaussian(n, d, rng), gaussian(n, d, rng), gaussian(n, d, rng)};
    Vector labels(n);
    for (int i = 0; i < n; ++i) labels(i) = i % 2 == 0 ? 1.0 : 0.0;
    const Objective objective = [&](ad::Binder& bind) {
      const std::array<ad::Var, 3> r{bind(reps[0]), bind(reps[1]), bind(reps[2])};
      return ad::bce_with_logits(fused_scores(bind(items), r, attention), labels);
    };
    const std::vector<Probe> probes{
        {"items", &items}, {"rep_cross_t", &reps[0]}, {"rep_own_t", &reps[1]}, {"rep_own_s", &reps[2]}};
    record(attention ? "tafc_bce" : "sum_pool_bce", probe_errors(objective, probes, options.step));
  }

  const DomainDataset ds = tiny_dataset();
  {
    const PropagationGraph graph = PropagationGraph::build(ds, Domain::A);
    Matrix users = gaussian(ds.user_count, d, rng);
    Matrix items = gaussian(ds.item_counts[0], d, rng);
    const Matrix wu = gaussian(ds.user_count, d, rng);
    const Matrix wv = gaussian(ds.item_counts[0], d, rng);
    const Objective objective = [&](ad::Binder& bind) {
      auto [hu, hv] = propagate(bind(users), bind(items), graph, 2);
      ad::Tape& tape = bind.tape();
      return ad::sum(ad::cwise_mul(hu, tape.constant(wu))) + ad::sum(ad::cwise_mul(hv, tape.constant(wv)));
    };
    const std::vector<Probe> probes{{"users", &users}, {"items", &items}};
    record("propagate", probe_errors(objective, probes, options.step));
  }

  {
    TrainingConfig config;
    config.d = d;
    config.alpha = 0.0;
    config.beta_A = config.beta_B = 0.0;
    config.gamma_A = config.gamma_B = 0.0;
    config.seed = options.seed;
    ModelParameters params = init_parameters(ds, config, rng);
    for (int di = 0; di < 2; ++di) {
      params.projector[di] = jittered(params.projector[di], rng);
      params.reconstructor[di] = jittered(params.reconstructor[di], rng);
    }
    const DomainGraphs graphs = build_graphs(ds);
    StepBatch batch;
    for (int di = 0; di < 2; ++di) batch.pairs[di] = sample_training_negatives(ds, kDomains[di], ds.train[di], 1, rng);
    batch.users.resize(static_cast<std::size_t>(ds.user_count));
    std::iota(batch.users.begin(), batch.users.end(), 0);
    for (int di = 0; di < 2; ++di) batch.permutation[di] = shuffle_permutation(ds.user_count, rng);
    const Objective total = [&](ad::Binder& bind) {
      return build_objective(bind, params, graphs, batch, config).total;
    };
    const Objective ce = [&](ad::Binder& bind) { return build_objective(bind, params, graphs, batch, config).ce; };
    std::vector<Probe> probes;
    for (auto& [name, m] : params.named()) {
      if (name.rfind("variational", 0) == 0) continue;
      probes.push_back({name, m});
    }
    record("total_equals_ce", compare(total, ce, probes, options.step));
  }
  return results;
}

}  // namespace a2dcdr
