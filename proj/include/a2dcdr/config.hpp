#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace a2dcdr {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Ablation { Full, InterOnly, IntraInter, WoTafc };

std::string to_string(Ablation a);
Ablation parse_ablation(const std::string& text);

struct AblationSwitches {
  bool mi = true;
  bool reconstruction = true;
  bool attention = true;
};
AblationSwitches switches_for(Ablation a);

// RBF kernel bandwidths. With `median_heuristic`, each entry multiplies the
// per-batch median pairwise distance; otherwise entries are absolute sigmas.
struct KernelConfig {
  bool median_heuristic = true;
  std::vector<double> bandwidths{0.25, 0.5, 1.0, 2.0, 4.0};

  void validate() const;
};

struct TrainingConfig {
  int d = 128;
  int layers = 2;
  double learning_rate = 0.002;
  int batch_size = 1024;
  int epochs = 100;
  double alpha = 1.0;
  double beta_A = 1e-4;
  double beta_B = 9e-4;
  double gamma_A = 0.01;
  double gamma_B = 0.09;
  int club_inner_steps = 5;
  double logvar_min = -10.0;
  double logvar_max = 10.0;
  double grl_scale = 1.0;
  bool symmetric_dcmmd = true;
  int negative_ratio = 1;
  Ablation ablation = Ablation::Full;
  std::uint64_t seed = 0;
  int eval_every = 100;
  int eval_k = 10;
  int eval_negatives = 999;
  std::string target_domain = "B";
  bool retrain_per_direction = false;
  double grad_clip = 10.0;
  KernelConfig kernel;

  void validate() const;
  // Stable 16-hex-digit hash of the canonical JSON form, seed excluded.
  std::string hash() const;
};

void to_json(nlohmann::json& j, const KernelConfig& k);
void from_json(const nlohmann::json& j, KernelConfig& k);
void to_json(nlohmann::json& j, const TrainingConfig& c);
// Unknown keys are rejected so typos surface as validation errors.
void from_json(const nlohmann::json& j, TrainingConfig& c);

TrainingConfig load_config(const std::string& path);

}  // namespace a2dcdr
