#include "a2dcdr/config.hpp"

#include <fstream>
#include <set>

#include "a2dcdr/data.hpp"

namespace a2dcdr {

using nlohmann::json;

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::InterOnly: return "inter_only";
    case Ablation::IntraInter: return "intra_inter";
    case Ablation::WoTafc: return "wo_tafc";
  }
  return "full";
}

Ablation parse_ablation(const std::string& text) {
  if (text == "full") return Ablation::Full;
  if (text == "inter_only") return Ablation::InterOnly;
  if (text == "intra_inter") return Ablation::IntraInter;
  if (text == "wo_tafc") return Ablation::WoTafc;
  throw ConfigError("ablation", "expected one of full, inter_only, intra_inter, wo_tafc; got '" + text + "'");
}

AblationSwitches switches_for(Ablation a) {
  switch (a) {
    case Ablation::Full: return {true, true, true};
    case Ablation::InterOnly: return {false, false, false};
    case Ablation::IntraInter: return {true, false, false};
    case Ablation::WoTafc: return {true, true, false};
  }
  return {};
}

void KernelConfig::validate() const {
  if (bandwidths.empty()) throw ConfigError("kernel.bandwidths", "must not be empty");
  for (double b : bandwidths) {
    if (!(b > 0.0)) throw ConfigError("kernel.bandwidths", "all bandwidths must be strictly positive");
  }
}

void TrainingConfig::validate() const {
  if (d < 1) throw ConfigError("d", "must be >= 1");
  if (layers < 0) throw ConfigError("layers", "must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be > 0");
  if (batch_size < 2) throw ConfigError("batch_size", "must be >= 2");
  if (epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (alpha < 0.0) throw ConfigError("alpha", "must be >= 0");
  if (beta_A < 0.0) throw ConfigError("beta_A", "must be >= 0");
  if (beta_B < 0.0) throw ConfigError("beta_B", "must be >= 0");
  if (gamma_A < 0.0) throw ConfigError("gamma_A", "must be >= 0");
  if (gamma_B < 0.0) throw ConfigError("gamma_B", "must be >= 0");
  if (club_inner_steps < 0) throw ConfigError("club_inner_steps", "must be >= 0");
  if (!(logvar_min < logvar_max)) throw ConfigError("logvar_min", "must be below logvar_max");
  if (!(grl_scale > 0.0)) throw ConfigError("grl_scale", "must be > 0");
  if (negative_ratio < 1) throw ConfigError("negative_ratio", "must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every", "must be >= 1");
  if (eval_k < 1) throw ConfigError("eval_k", "must be >= 1");
  if (eval_negatives < 1) throw ConfigError("eval_negatives", "must be >= 1");
  if (target_domain != "A" && target_domain != "B") throw ConfigError("target_domain", "must be A or B");
  if (!(grad_clip > 0.0)) throw ConfigError("grad_clip", "must be > 0");
  kernel.validate();
}

std::string TrainingConfig::hash() const {
  // The seed names the run directory separately.
  json j = *this;
  j.erase("seed");
  return fnv1a_hex(j.dump());
}

void to_json(json& j, const KernelConfig& k) {
  j = json{{"median_heuristic", k.median_heuristic}, {"bandwidths", k.bandwidths}};
}

void from_json(const json& j, KernelConfig& k) {
  for (const auto& [key, _] : j.items()) {
    if (key != "median_heuristic" && key != "bandwidths") throw ConfigError("kernel." + key, "unknown field");
  }
  if (j.contains("median_heuristic")) k.median_heuristic = j.at("median_heuristic").get<bool>();
  if (j.contains("bandwidths")) k.bandwidths = j.at("bandwidths").get<std::vector<double>>();
}

void to_json(json& j, const TrainingConfig& c) {
  j = json{{"d", c.d},
           {"layers", c.layers},
           {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"alpha", c.alpha},
           {"beta_A", c.beta_A},
           {"beta_B", c.beta_B},
           {"gamma_A", c.gamma_A},
           {"gamma_B", c.gamma_B},
           {"club_inner_steps", c.club_inner_steps},
           {"logvar_min", c.logvar_min},
           {"logvar_max", c.logvar_max},
           {"grl_scale", c.grl_scale},
           {"symmetric_dcmmd", c.symmetric_dcmmd},
           {"negative_ratio", c.negative_ratio},
           {"ablation", to_string(c.ablation)},
           {"seed", c.seed},
           {"eval_every", c.eval_every},
           {"eval_k", c.eval_k},
           {"eval_negatives", c.eval_negatives},
           {"target_domain", c.target_domain},
           {"retrain_per_direction", c.retrain_per_direction},
           {"grad_clip", c.grad_clip},
           {"kernel", c.kernel}};
}

void from_json(const json& j, TrainingConfig& c) {
  const json defaults = TrainingConfig{};
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw ConfigError(key, "unknown field");
  }
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw ConfigError(key, std::string("wrong type (") + e.what() + ")");
    }
  };
  read("d", c.d);
  read("layers", c.layers);
  read("learning_rate", c.learning_rate);
  read("batch_size", c.batch_size);
  read("epochs", c.epochs);
  read("alpha", c.alpha);
  read("beta_A", c.beta_A);
  read("beta_B", c.beta_B);
  read("gamma_A", c.gamma_A);
  read("gamma_B", c.gamma_B);
  read("club_inner_steps", c.club_inner_steps);
  read("logvar_min", c.logvar_min);
  read("logvar_max", c.logvar_max);
  read("grl_scale", c.grl_scale);
  read("symmetric_dcmmd", c.symmetric_dcmmd);
  read("negative_ratio", c.negative_ratio);
  if (j.contains("ablation")) c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  read("seed", c.seed);
  read("eval_every", c.eval_every);
  read("eval_k", c.eval_k);
  read("eval_negatives", c.eval_negatives);
  read("target_domain", c.target_domain);
  read("retrain_per_direction", c.retrain_per_direction);
  read("grad_clip", c.grad_clip);
  read("kernel", c.kernel);
}

TrainingConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("parse error: ") + e.what());
  }
  TrainingConfig c = j.get<TrainingConfig>();
  c.validate();
  return c;
}

}  // namespace a2dcdr
