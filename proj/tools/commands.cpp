#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "a2dcdr/gradcheck.hpp"
#include "a2dcdr/training.hpp"
#include "run_manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace a2dcdr::cli {

namespace {

const char* const kBandwidthsFlag = "kernel.bandwidths";
const char* const kMedianFlag = "kernel.median_heuristic";

void note(const GlobalOptions& g, const std::string& line) {
  if (!g.quiet) std::cerr << line << '\n';
}

json coerce(const std::string& field, const std::string& text, const json& like) {
  if (like.is_string()) return text;
  if (like.is_boolean()) {
    if (text == "true" || text == "1" || text == "on") return true;
    if (text == "false" || text == "0" || text == "off") return false;
    throw ConfigError(field, "expected true/false, got '" + text + "'");
  }
  if (like.is_array()) {
    json out = json::array();
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(coerce(field, item, like.empty() ? json(0.0) : like.front()));
    return out;
  }
  const json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_number()) throw ConfigError(field, "expected a number, got '" + text + "'");
  return parsed;
}

const char* const kDatasetFiles[] = {"dataset.json", "users.tsv",   "items_A.tsv",      "items_B.tsv",     "train_A.tsv",
                                     "train_B.tsv",  "test_A.tsv",  "test_B.tsv",       "candidates_A.tsv", "candidates_B.tsv"};

std::string dataset_fingerprint(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const char* f : kDatasetFiles)
    if (fs::exists(dir / f)) files.push_back(dir / f);
  return fingerprint_files(files);
}

CandidateSets load_or_build_candidates(const fs::path& data, const DomainDataset& ds, const TrainingConfig& config) {
  if (!fs::exists(data / "candidates_A.tsv") || !fs::exists(data / "candidates_B.tsv")) return make_candidates(ds, config);
  return {load_candidates(data / "candidates_A.tsv"), load_candidates(data / "candidates_B.tsv")};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fs::path run_directory(const GlobalOptions& g, const TrainingConfig& config) {
  return fs::path(g.out.value_or("runs")) / (config.hash() + "-s" + std::to_string(config.seed));
}

std::string epoch_line(const EvalRecord& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << "epoch " << r.epoch << "  A HR " << r.report.domains[0].hr << " NDCG "
      << r.report.domains[0].ndcg << "  B HR " << r.report.domains[1].hr << " NDCG " << r.report.domains[1].ndcg;
  return out.str();
}

}  // namespace

void add_config_flags(CLI::App& app, GlobalOptions& global) {
  const json defaults = TrainingConfig{};
  for (const auto& [key, value] : defaults.items()) {
    if (key == "seed" || key == "kernel") continue;
    app.add_option("--" + key, global.overrides[key], "config field " + key)->group("Config fields");
  }
  app.add_option(std::string("--") + kMedianFlag, global.overrides[kMedianFlag], "scale bandwidths by the median distance")
      ->group("Config fields");
  app.add_option(std::string("--") + kBandwidthsFlag, global.overrides[kBandwidthsFlag], "comma-separated RBF bandwidths")
      ->group("Config fields");
}

TrainingConfig resolve_config(const GlobalOptions& global) {
  json j = global.config_path ? json(load_config(*global.config_path)) : json(TrainingConfig{});
  for (const auto& [key, text] : global.overrides) {
    if (text.empty()) continue;
    if (key == kMedianFlag || key == kBandwidthsFlag) {
      const std::string sub = key.substr(key.find('.') + 1);
      j["kernel"][sub] = coerce(key, text, j["kernel"][sub]);
    } else {
      j[key] = coerce(key, text, j[key]);
    }
  }
  if (global.seed) j["seed"] = *global.seed;
  TrainingConfig config = j.get<TrainingConfig>();
  config.validate();
  return config;
}

void cmd_prepare(const GlobalOptions& global, const PrepareOptions& options) {
  if (options.synthetic == !options.input.empty()) {
    throw UsageError("prepare: give exactly one of --synthetic or --input");
  }
  if (!options.test_input.empty() && options.input.size() != 2) {
    throw UsageError("prepare: --test-input needs two per-domain --input files");
  }
  if (options.delimiter.size() != 1) throw UsageError("prepare: --delimiter must be one character");
  const TrainingConfig config = resolve_config(global);
  const std::string started = utc_now();

  DomainDataset ds;
  json source;
  if (options.synthetic) {
    SyntheticSpec spec = options.spec;
    spec.seed = config.seed;
    ds = synthesize_dataset(spec).dataset;
    source = {{"synthetic",
               {{"users", spec.user_count},
                {"items", spec.item_counts},
                {"latent_dim", spec.latent_dim},
                {"shared_strength", spec.shared_strength},
                {"exclusive_strength", spec.exclusive_strength},
                {"noise", spec.noise},
                {"interactions_per_user", spec.interactions_per_user}}}};
  } else {
    LoadOptions load;
    load.delimiter = options.delimiter[0];
    load.skip_header = options.skip_header;
    if (options.input.size() == 1) {
      ds = load_tagged_interactions(options.input[0], load);
    } else {
      const fs::path ta = options.test_input.empty() ? fs::path() : fs::path(options.test_input[0]);
      const fs::path tb = options.test_input.empty() ? fs::path() : fs::path(options.test_input[1]);
      ds = load_interactions(options.input[0], options.input[1], load, ta, tb);
    }
    source = {{"input", options.input}, {"test_input", options.test_input}};
  }

  const fs::path out = global.out.value_or("data");
  fs::create_directories(out);
  save_dataset(ds, out);
  const CandidateSets candidates = make_candidates(ds, config);
  save_candidates(candidates[0], out / "candidates_A.tsv");
  save_candidates(candidates[1], out / "candidates_B.tsv");

  RunManifest manifest;
  manifest.command = "prepare";
  manifest.config = config;
  manifest.seed = config.seed;
  manifest.dataset_fingerprint = dataset_fingerprint(out);
  manifest.started_at = started;
  manifest.finished_at = utc_now();
  manifest.extra["source"] = source;
  for (int di = 0; di < 2; ++di) {
    manifest.extra["skipped_candidate_users"][name_of(kDomains[di])] =
        static_cast<int>(ds.test[di].size() - candidates[di].size());
  }
  write_manifest(manifest, out, "prepare.json");
  note(global, "prepared " + std::to_string(ds.user_count) + " users, " + std::to_string(ds.train[0].size()) + "/" +
                   std::to_string(ds.train[1].size()) + " train rows; fingerprint " + manifest.dataset_fingerprint);
  std::cout << out.string() << '\n';
}

void cmd_train(const GlobalOptions& global, const TrainOptions& options) {
  const TrainingConfig config = resolve_config(global);
  const std::string started = utc_now();
  const fs::path data = options.data;
  const DomainDataset ds = load_dataset(data);
  const CandidateSets candidates = load_or_build_candidates(data, ds, config);

  const fs::path run = run_directory(global, config);
  fs::remove_all(run);
  fs::create_directories(run);
  write_json(run / "config.json", config);

  FitOptions fo;
  fo.candidates = &candidates;
  fo.checkpoint_dir = run / "best";
  fo.on_eval = [&](const EvalRecord& r) { note(global, epoch_line(r)); };
  const FitResult result = fit(ds, config, fo);

  if (!config.retrain_per_direction) save_checkpoint(result.final_params, config.hash(), run / "final");
  write_train_log(result.log, run / "train_log.json");
  write_timings(result.log, run / "timings.tsv");
  json report = to_json(result.best_report);
  report["best_epoch"] = result.best_epoch;
  write_json(run / "report.json", report);

  RunManifest manifest;
  manifest.command = "train";
  manifest.config = config;
  manifest.seed = config.seed;
  manifest.dataset_fingerprint = dataset_fingerprint(data);
  manifest.started_at = started;
  manifest.finished_at = utc_now();
  manifest.extra["config_hash"] = config.hash();
  manifest.extra["data"] = data.string();
  write_manifest(manifest, run);

  if (!global.quiet) std::cerr << format_table(result.best_report);
  std::cout << run.string() << '\n';
}

void cmd_eval(const GlobalOptions& global, const EvalOptions& options) {
  const std::string started = utc_now();
  const fs::path run = options.run;
  if (!fs::exists(run / "config.json")) throw UsageError(run.string() + " is not a run directory (no config.json)");
  TrainingConfig config = load_config((run / "config.json").string());
  const DomainDataset ds = load_dataset(options.data);
  const CandidateSets candidates = load_or_build_candidates(options.data, ds, config);
  const DomainGraphs graphs = build_graphs(ds);
  const bool attention = switches_for(config.ablation).attention;

  // per-direction runs keep one checkpoint per target domain
  const bool directed = fs::exists(run / options.checkpoint / "A" / "manifest.json");
  std::array<ModelParameters, 2> params;
  for (int di = 0; di < 2; ++di) {
    const fs::path dir = directed ? run / options.checkpoint / name_of(kDomains[di]) : run / options.checkpoint;
    if (di == 0 || directed) {
      params[di] = load_checkpoint(dir, ds, config);
    } else {
      params[di] = params[0];
    }
  }

  EvalReport report;
  report.k = config.eval_k;
  report.config_hash = config.hash();
  report.seed = config.seed;
  SparsityReport sparsity;
  for (int di = 0; di < 2; ++di) {
    report.domains[di] =
        evaluate_domain(params[di], graphs, kDomains[di], candidates[di], config.eval_k, attention);
    sparsity.cells[di] =
        sparsity_report(params[di], ds, graphs, candidates, sparsity.buckets, config.eval_k, attention).cells[di];
  }
  report.sparsity = sparsity;

  const fs::path out = global.out ? fs::path(*global.out) : run / "eval";
  fs::create_directories(out);
  write_json(out / "eval_report.json", to_json(report));
  write_text(out / "eval_report.txt", format_table(report));
  if (options.export_reps > 0) {
    const int target = index_of(parse_domain(config.target_domain));
    export_representations(params[target], ds, graphs, options.export_reps, global.seed.value_or(config.seed),
                           out / "representations.tsv", options.export_specific_a);
  }

  RunManifest manifest;
  manifest.command = "eval";
  manifest.config = config;
  manifest.seed = config.seed;
  manifest.dataset_fingerprint = dataset_fingerprint(options.data);
  manifest.started_at = started;
  manifest.finished_at = utc_now();
  manifest.extra["run"] = run.string();
  manifest.extra["checkpoint"] = options.checkpoint;
  write_manifest(manifest, out);

  if (!global.quiet) std::cout << format_table(report);
}

void cmd_ablate(const GlobalOptions& global, const AblateOptions& options) {
  if (options.seeds < 1) throw UsageError("ablate: --seeds must be at least 1");
  const TrainingConfig base = resolve_config(global);
  const std::string started = utc_now();
  const DomainDataset ds = load_dataset(options.data);
  const CandidateSets candidates = load_or_build_candidates(options.data, ds, base);

  const std::array<Ablation, 4> variants{Ablation::InterOnly, Ablation::IntraInter, Ablation::WoTafc, Ablation::Full};
  json rows = json::array();
  std::ostringstream table;
  table << std::fixed << std::setprecision(2);
  const std::string k = std::to_string(base.eval_k);
  table << std::left << std::setw(14) << "Variant" << std::right << std::setw(10) << ("A HR@" + k) << std::setw(12)
        << ("A NDCG@" + k) << std::setw(10) << ("B HR@" + k) << std::setw(12) << ("B NDCG@" + k) << '\n';
  for (const Ablation variant : variants) {
    std::array<double, 4> mean{};
    json per_seed = json::array();
    for (int s = 0; s < options.seeds; ++s) {
      TrainingConfig c = base;
      c.ablation = variant;
      c.seed = base.seed + static_cast<std::uint64_t>(s);
      note(global, "ablate " + to_string(variant) + " seed " + std::to_string(c.seed));
      FitOptions fo;
      fo.candidates = &candidates;
      const FitResult r = fit(ds, c, fo);
      per_seed.push_back(to_json(r.best_report));
      mean[0] += r.best_report.domains[0].hr / options.seeds;
      mean[1] += r.best_report.domains[0].ndcg / options.seeds;
      mean[2] += r.best_report.domains[1].hr / options.seeds;
      mean[3] += r.best_report.domains[1].ndcg / options.seeds;
    }
    rows.push_back({{"variant", to_string(variant)},
                    {"A", {{"hr", mean[0]}, {"ndcg", mean[1]}}},
                    {"B", {{"hr", mean[2]}, {"ndcg", mean[3]}}},
                    {"per_seed", per_seed}});
    table << std::left << std::setw(14) << to_string(variant) << std::right << std::setw(10) << mean[0]
          << std::setw(12) << mean[1] << std::setw(10) << mean[2] << std::setw(12) << mean[3] << '\n';
  }

  const fs::path out = fs::path(global.out.value_or("runs")) /
                       ("ablation-" + base.hash() + "-s" + std::to_string(base.seed));
  fs::create_directories(out);
  write_json(out / "ablation.json", {{"seeds", options.seeds}, {"variants", rows}});
  write_text(out / "ablation.txt", table.str());

  RunManifest manifest;
  manifest.command = "ablate";
  manifest.config = base;
  manifest.seed = base.seed;
  manifest.dataset_fingerprint = dataset_fingerprint(options.data);
  manifest.started_at = started;
  manifest.finished_at = utc_now();
  write_manifest(manifest, out);
  std::cout << table.str();
}

bool cmd_gradcheck(const GlobalOptions& global, const GradcheckOptions& options) {
  if (options.d < 1 || options.d > 8 || options.n < 2 || options.n > 8) {
    throw UsageError("gradcheck: need 1 <= --d <= 8 and 2 <= --n <= 8");
  }
  GradCheckOptions go;
  go.d = options.d;
  go.n = options.n;
  go.tolerance = options.tolerance;
  go.seed = global.seed.value_or(0);
  bool ok = true;
  std::printf("%-18s %-22s %12s  %s\n", "suite", "worst probe", "rel error", "result");
  for (const auto& r : run_gradient_checks(go)) {
    ok = ok && r.passed;
    std::printf("%-18s %-22s %12.3e  %s\n", r.suite.c_str(), r.worst_probe.c_str(), r.worst_relative_error,
                r.passed ? "PASS" : "FAIL");
  }
  return ok;
}

}  // namespace a2dcdr::cli
