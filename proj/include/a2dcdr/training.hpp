#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "a2dcdr/config.hpp"
#include "a2dcdr/data.hpp"
#include "a2dcdr/disentangle.hpp"
#include "a2dcdr/eval.hpp"
#include "a2dcdr/graph_encoders.hpp"
#include "json.hpp"

namespace a2dcdr {

// mi and rec already carry their per-domain weights.
inline double total_loss(double ce, double dcmmd, double mi, double rec, double alpha) {
  return ce + alpha * dcmmd + mi + rec;
}

struct TrainRecord {
  int epoch = 0;
  long step = 0;
  double ce = 0.0;
  double dcmmd = 0.0;
  double mi = 0.0;
  double rec = 0.0;
  double total = 0.0;
  double wall_seconds = 0.0;  // kept out of the serialized log
};

struct EvalRecord {
  int epoch = 0;
  EvalReport report;
};

struct TrainLog {
  std::vector<TrainRecord> steps;
  std::vector<EvalRecord> evals;
};

// Deterministic content only: wall times go to write_timings.
nlohmann::json to_json(const TrainLog& log);
void write_train_log(const TrainLog& log, const std::filesystem::path& path);
void write_timings(const TrainLog& log, const std::filesystem::path& path);

// One step's sampled inputs.
struct StepBatch {
  std::array<std::vector<LabeledInteraction>, 2> pairs;  // positives followed by their negatives
  std::vector<int> users;                                // rows for the auxiliary losses
  std::array<std::vector<int>, 2> permutation;           // CLUB shuffle per domain
};

struct ObjectiveTerms {
  ad::Var ce;
  ad::Var dcmmd;
  ad::Var mi;   // beta-weighted
  ad::Var rec;  // gamma-weighted
  ad::Var total;
};

// The training objective on a tape, variational nets frozen. Disabled terms are constant zeros.
ObjectiveTerms build_objective(ad::Binder& bind, const ModelParameters& params, const DomainGraphs& graphs,
                               const StepBatch& batch, const TrainingConfig& config);

class Trainer {
 public:
  Trainer(const DomainDataset& dataset, const TrainingConfig& config);
  Trainer(const DomainDataset& dataset, const TrainingConfig& config, ModelParameters initial);

  int steps_per_epoch() const { return steps_per_epoch_; }
  const ModelParameters& parameters() const { return params_; }
  ModelParameters& parameters() { return params_; }
  const DomainGraphs& graphs() const { return graphs_; }
  const AblationSwitches& switches() const { return switches_; }
  int epoch() const { return epoch_; }

  // Full step: sample, fit the variational nets, update everything else.
  TrainRecord step();

  // The phases of step(), exposed for inspection.
  StepBatch sample_batch();
  void fit_variational(const StepBatch& batch);
  TrainRecord update(const StepBatch& batch);

  void set_last_good_checkpoint(std::string ref) { last_good_checkpoint_ = std::move(ref); }

 private:
  struct Cursor {
    std::vector<int> order;
    std::size_t position = 0;
  };
  std::vector<int> take(int domain, std::size_t count);

  const DomainDataset* dataset_;
  TrainingConfig config_;
  AblationSwitches switches_;
  DomainGraphs graphs_;
  ModelParameters params_;
  Rng rng_;
  Adam adam_;
  std::array<VariationalFitter, 2> fitters_;
  std::array<Cursor, 2> cursors_;
  int larger_domain_ = 0;
  int steps_per_epoch_ = 1;
  int epoch_ = 0;
  int step_in_epoch_ = 0;
  long global_step_ = 0;
  std::string last_good_checkpoint_ = "none";
};

using CandidateSets = std::array<std::vector<CandidateSet>, 2>;

// Builds evaluation candidates from the test split with the configured count.
CandidateSets make_candidates(const DomainDataset& dataset, const TrainingConfig& config);

EvalReport evaluate(const ModelParameters& params, const DomainGraphs& graphs, const CandidateSets& candidates,
                    const TrainingConfig& config);

struct FitOptions {
  const CandidateSets* candidates = nullptr;  // built from the dataset when absent
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const TrainRecord&)> on_step;
  std::function<void(const EvalRecord&)> on_eval;
};

struct FitResult {
  ModelParameters best;
  ModelParameters final_params;
  TrainLog log;
  EvalReport best_report;
  int best_epoch = 0;
};

FitResult fit(const DomainDataset& dataset, const TrainingConfig& config, const FitOptions& options = {});

}  // namespace a2dcdr
