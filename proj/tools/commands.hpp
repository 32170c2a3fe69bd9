#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "a2dcdr/config.hpp"
#include "a2dcdr/data.hpp"

namespace CLI {
class App;
}

namespace a2dcdr::cli {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GlobalOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
  // --<field> VALUE overrides, keyed by TrainingConfig field name
  std::map<std::string, std::string> overrides;
};

// Registers one flag per TrainingConfig field (seed is global).
void add_config_flags(CLI::App& app, GlobalOptions& global);

// Defaults < --config file < flat flags < --seed; validated.
TrainingConfig resolve_config(const GlobalOptions& global);

struct PrepareOptions {
  bool synthetic = false;
  std::vector<std::string> input;
  std::vector<std::string> test_input;
  std::string delimiter = "\t";
  bool skip_header = false;
  SyntheticSpec spec;
};

struct TrainOptions {
  std::string data;
};

struct EvalOptions {
  std::string run;
  std::string data;
  std::string checkpoint = "best";
  int export_reps = 0;
  bool export_specific_a = false;
};

struct AblateOptions {
  std::string data;
  int seeds = 1;
};

struct GradcheckOptions {
  int d = 4;
  int n = 6;
  double tolerance = 1e-3;
};

void cmd_prepare(const GlobalOptions& global, const PrepareOptions& options);
void cmd_train(const GlobalOptions& global, const TrainOptions& options);
void cmd_eval(const GlobalOptions& global, const EvalOptions& options);
void cmd_ablate(const GlobalOptions& global, const AblateOptions& options);
// false when any suite fails
bool cmd_gradcheck(const GlobalOptions& global, const GradcheckOptions& options);

}  // namespace a2dcdr::cli
