#include "a2dcdr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "a2dcdr/alignment.hpp"
#include "a2dcdr/fusion_scoring.hpp"

namespace a2dcdr {

using nlohmann::json;

json to_json(const TrainLog& log) {
  json steps = json::array();
  for (const auto& r : log.steps) {
    steps.push_back({{"epoch", r.epoch},
                     {"step", r.step},
                     {"ce", r.ce},
                     {"dcmmd", r.dcmmd},
                     {"mi", r.mi},
                     {"rec", r.rec},
                     {"total", r.total}});
  }
  json evals = json::array();
  for (const auto& e : log.evals) evals.push_back({{"epoch", e.epoch}, {"report", to_json(e.report)}});
  return {{"steps", steps}, {"evals", evals}};
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("I/O error: cannot write " + path.string());
  out << to_json(log).dump(1) << '\n';
}

void write_timings(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("I/O error: cannot write " + path.string());
  out << "step\twall_seconds\n";
  for (const auto& r : log.steps) out << r.step << '\t' << r.wall_seconds << '\n';
}

Trainer::Trainer(const DomainDataset& dataset, const TrainingConfig& config)
    : Trainer(dataset, config, [&] {
        config.validate();
        Rng rng(config.seed);
        return init_parameters(dataset, config, rng);
      }()) {}

Trainer::Trainer(const DomainDataset& dataset, const TrainingConfig& config, ModelParameters initial)
    : dataset_(&dataset),
      config_(config),
      switches_(switches_for(config.ablation)),
      graphs_(build_graphs(dataset)),
      params_(std::move(initial)),
      rng_(config.seed ^ 0x5851F42D4C957F2DULL),
      adam_(config.learning_rate),
      fitters_{VariationalFitter(config.learning_rate), VariationalFitter(config.learning_rate)} {
  config_.validate();
  std::size_t largest = 0;
  for (int di = 0; di < 2; ++di) {
    const std::size_t n = dataset.train[di].size();
    if (n == 0) throw DataError(std::string("no training interactions in domain ") + name_of(kDomains[di]));
    cursors_[di].order.resize(n);
    std::iota(cursors_[di].order.begin(), cursors_[di].order.end(), 0);
    std::shuffle(cursors_[di].order.begin(), cursors_[di].order.end(), rng_);
    if (n > largest) {
      largest = n;
      larger_domain_ = di;
    }
  }
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  steps_per_epoch_ = static_cast<int>((largest + batch - 1) / batch);
}

std::vector<int> Trainer::take(int domain, std::size_t count) {
  Cursor& c = cursors_[domain];
  std::vector<int> out;
  out.reserve(count);
  while (out.size() < count) {
    if (c.position == c.order.size()) {
      std::shuffle(c.order.begin(), c.order.end(), rng_);
      c.position = 0;
    }
    out.push_back(c.order[c.position++]);
  }
  return out;
}

StepBatch Trainer::sample_batch() {
  StepBatch batch;
  const auto b = static_cast<std::size_t>(config_.batch_size);
  for (int di = 0; di < 2; ++di) {
    const std::size_t n = dataset_->train[di].size();
    // The larger domain covers its positives exactly once per epoch; the other wraps.
    const std::size_t count =
        di == larger_domain_ ? std::min(b, n - static_cast<std::size_t>(step_in_epoch_) * b) : std::min(b, n);
    std::vector<Interaction> positives;
    positives.reserve(count);
    for (int idx : take(di, count)) positives.push_back(dataset_->train[di][static_cast<std::size_t>(idx)]);
    batch.pairs[di] = sample_training_negatives(*dataset_, kDomains[di], positives, config_.negative_ratio, rng_);
  }

  std::vector<int> users(static_cast<std::size_t>(dataset_->user_count));
  std::iota(users.begin(), users.end(), 0);
  const std::size_t m = std::min(b, users.size());
  for (std::size_t k = 0; k < m; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, users.size() - 1);
    std::swap(users[k], users[pick(rng_)]);
  }
  users.resize(m);
  batch.users = std::move(users);

  if (switches_.mi) {
    for (int di = 0; di < 2; ++di) batch.permutation[di] = shuffle_permutation(static_cast<int>(m), rng_);
  }
  return batch;
}

namespace {

Matrix gather(const Matrix& m, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

void Trainer::fit_variational(const StepBatch& batch) {
  if (!switches_.mi || config_.club_inner_steps == 0) return;
  const EncodedTables enc = encode_tables(params_, graphs_);
  for (int di = 0; di < 2; ++di) {
    fitters_[di].fit(params_.variational[di], gather(enc.h_t[di], batch.users), gather(enc.h_s[di], batch.users),
                     config_.club_inner_steps);
  }
}

ObjectiveTerms build_objective(ad::Binder& bind, const ModelParameters& params, const DomainGraphs& graphs,
                               const StepBatch& batch, const TrainingConfig& config) {
  const AblationSwitches switches = switches_for(config.ablation);
  ad::Tape& tape = bind.tape();
  for (const Matrix* p : params.variational_parameters()) bind.freeze(*p);

  const EncodedVars enc = encode_tables(bind, params, graphs);

  std::array<ad::Var, 2> ce_terms;
  for (int di = 0; di < 2; ++di) {
    const auto& pairs = batch.pairs[di];
    std::vector<int> users(pairs.size()), items(pairs.size());
    Vector labels(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      users[i] = pairs[i].user;
      items[i] = pairs[i].item;
      labels(static_cast<Eigen::Index>(i)) = pairs[i].label;
    }
    const int oi = 1 - di;
    const std::array<ad::Var, 3> reps{ad::gather_rows(enc.h_t[oi], users), ad::gather_rows(enc.h_t[di], users),
                                      ad::gather_rows(enc.h_s[di], users)};
    const ad::Var scores = fused_scores(ad::gather_rows(enc.h_v[di], items), reps, switches.attention);
    ce_terms[di] = ad::bce_with_logits(scores, labels);
  }

  ObjectiveTerms terms;
  terms.ce = ce_terms[0] + ce_terms[1];

  DisentangledVars aux;
  for (int di = 0; di < 2; ++di) {
    aux.h_t[di] = ad::gather_rows(enc.h_t[di], batch.users);
    aux.h_s[di] = ad::gather_rows(enc.h_s[di], batch.users);
  }
  terms.dcmmd = dc_mmd_loss(bind, aux, params.projector, config.kernel, config.symmetric_dcmmd, config.grl_scale).total;

  terms.mi = tape.constant(Matrix::Zero(1, 1));
  if (switches.mi) {
    const std::array<double, 2> beta{config.beta_A, config.beta_B};
    for (int di = 0; di < 2; ++di) {
      terms.mi = terms.mi + ad::scale(club_mi_loss(bind, params.variational[di], aux.h_t[di], aux.h_s[di],
                                                   batch.permutation[di]),
                                      beta[di]);
    }
  }

  terms.rec = tape.constant(Matrix::Zero(1, 1));
  if (switches.reconstruction) {
    RawUserRows raw;
    for (int di = 0; di < 2; ++di) {
      raw.u_t[di] = gather(params.tables.user_t[di], batch.users);
      raw.u_s[di] = gather(params.tables.user_s[di], batch.users);
    }
    terms.rec = reconstruction_loss(bind, params.reconstructor, aux, raw, config.gamma_A, config.gamma_B).total;
  }

  terms.total = terms.ce + ad::scale(terms.dcmmd, config.alpha) + terms.mi + terms.rec;
  return terms;
}

TrainRecord Trainer::update(const StepBatch& batch) {
  ad::Tape tape;
  ad::Binder bind(tape);
  const ObjectiveTerms terms = build_objective(bind, params_, graphs_, batch, config_);

  TrainRecord record;
  record.epoch = epoch_ + 1;
  record.step = global_step_ + 1;
  record.ce = terms.ce.scalar();
  record.dcmmd = terms.dcmmd.scalar();
  record.mi = terms.mi.scalar();
  record.rec = terms.rec.scalar();
  record.total = total_loss(record.ce, record.dcmmd, record.mi, record.rec, config_.alpha);
  if (!std::isfinite(record.total)) {
    throw NumericalError("non-finite loss at epoch " + std::to_string(record.epoch) + ", step " +
                         std::to_string(record.step) + " (ce " + std::to_string(record.ce) + ", dcmmd " +
                         std::to_string(record.dcmmd) + ", mi " + std::to_string(record.mi) + ", rec " +
                         std::to_string(record.rec) + "); last good checkpoint: " + last_good_checkpoint_);
  }

  tape.backward(terms.total);
  const ParameterList main = params_.main_parameters();
  std::vector<Matrix> grads = gradients_of(bind, main);
  clip_global_norm(grads, config_.grad_clip);
  adam_.step(main, grads);

  ++global_step_;
  if (++step_in_epoch_ == steps_per_epoch_) {
    step_in_epoch_ = 0;
    ++epoch_;
  }
  return record;
}

TrainRecord Trainer::step() {
  const auto start = std::chrono::steady_clock::now();
  const StepBatch batch = sample_batch();
  try {
    fit_variational(batch);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + "; last good checkpoint: " + last_good_checkpoint_);
  }
  TrainRecord record = update(batch);
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

CandidateSets make_candidates(const DomainDataset& dataset, const TrainingConfig& config) {
  CandidateSets out;
  for (int di = 0; di < 2; ++di) {
    const std::uint64_t seed = config.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(di + 1));
    out[di] = build_candidate_sets(dataset, kDomains[di], seed, config.eval_negatives).sets;
  }
  return out;
}

EvalReport evaluate(const ModelParameters& params, const DomainGraphs& graphs, const CandidateSets& candidates,
                    const TrainingConfig& config) {
  EvalReport report;
  report.k = config.eval_k;
  report.config_hash = config.hash();
  report.seed = config.seed;
  const bool attention = switches_for(config.ablation).attention;
  for (int di = 0; di < 2; ++di) {
    report.domains[di] = evaluate_domain(params, graphs, kDomains[di], candidates[di], config.eval_k, attention);
  }
  return report;
}

namespace {

FitResult fit_once(const DomainDataset& dataset, const TrainingConfig& config, const CandidateSets& candidates,
                   const FitOptions& options) {
  Trainer trainer(dataset, config);
  const int target = index_of(parse_domain(config.target_domain));
  FitResult result;
  double best_hr = -std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (int s = 0; s < trainer.steps_per_epoch(); ++s) {
      result.log.steps.push_back(trainer.step());
      if (options.on_step) options.on_step(result.log.steps.back());
    }
    if (epoch % config.eval_every != 0 && epoch != config.epochs) continue;
    EvalRecord record{epoch, evaluate(trainer.parameters(), trainer.graphs(), candidates, config)};
    if (record.report.domains[target].hr > best_hr) {
      best_hr = record.report.domains[target].hr;
      result.best = trainer.parameters();
      result.best_report = record.report;
      result.best_epoch = epoch;
      if (options.checkpoint_dir) {
        save_checkpoint(result.best, config.hash(), *options.checkpoint_dir);
        trainer.set_last_good_checkpoint(options.checkpoint_dir->string() + " (epoch " + std::to_string(epoch) + ")");
      }
    }
    result.log.evals.push_back(record);
    if (options.on_eval) options.on_eval(result.log.evals.back());
  }
  result.final_params = trainer.parameters();
  return result;
}

}  // namespace

FitResult fit(const DomainDataset& dataset, const TrainingConfig& config, const FitOptions& options) {
  config.validate();
  CandidateSets built;
  const CandidateSets* candidates = options.candidates;
  if (!candidates) {
    built = make_candidates(dataset, config);
    candidates = &built;
  }
  if (!config.retrain_per_direction) return fit_once(dataset, config, *candidates, options);

  // One run per target domain; each reports the domain it was selected on.
  const int target = index_of(parse_domain(config.target_domain));
  std::array<FitResult, 2> runs;
  for (int di = 0; di < 2; ++di) {
    TrainingConfig directed = config;
    directed.target_domain = name_of(kDomains[di]);
    FitOptions opts = options;
    if (options.checkpoint_dir) opts.checkpoint_dir = *options.checkpoint_dir / directed.target_domain;
    runs[di] = fit_once(dataset, directed, *candidates, opts);
  }
  FitResult result = std::move(runs[target]);
  result.best_report.domains[1 - target] = runs[1 - target].best_report.domains[1 - target];
  return result;
}

}  // namespace a2dcdr
