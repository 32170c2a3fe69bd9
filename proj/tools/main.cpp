#include <iostream>

#include "CLI11.hpp"
#include "a2dcdr/disentangle.hpp"
#include "commands.hpp"

using namespace a2dcdr;
using namespace a2dcdr::cli;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-domain recommender with disentangled user representations"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON file with TrainingConfig fields")->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "seed for training, synthesis and candidate sampling");
  app.add_option("--out", global.out, "output directory");
  app.add_flag("--quiet", global.quiet, "suppress progress on stderr");

  PrepareOptions prep;
  auto* prepare = app.add_subcommand("prepare", "write a dataset directory with candidate sets");
  prepare->add_flag("--synthetic", prep.synthetic, "generate the two-domain synthetic task");
  prepare->add_option("--input", prep.input, "A.tsv B.tsv, or one tagged file (user, item, A|B[, ts])")->expected(1, 2);
  prepare->add_option("--test-input", prep.test_input, "explicit held-out files for A and B")->expected(2);
  prepare->add_option("--delimiter", prep.delimiter, "field separator");
  prepare->add_flag("--skip-header", prep.skip_header);
  prepare->add_option("--users", prep.spec.user_count)->capture_default_str();
  prepare->add_option("--items-a", prep.spec.item_counts[0])->capture_default_str();
  prepare->add_option("--items-b", prep.spec.item_counts[1])->capture_default_str();
  prepare->add_option("--latent-dim", prep.spec.latent_dim)->capture_default_str();
  prepare->add_option("--shared", prep.spec.shared_strength, "shared preference strength")->capture_default_str();
  prepare->add_option("--exclusive", prep.spec.exclusive_strength, "domain-exclusive strength")->capture_default_str();
  prepare->add_option("--noise", prep.spec.noise)->capture_default_str();
  prepare->add_option("--interactions", prep.spec.interactions_per_user, "mean per user per domain")
      ->capture_default_str();
  add_config_flags(*prepare, global);

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "fit a model; writes runs/<hash>-s<seed>/");
  train->add_option("--data", train_opts.data, "prepared dataset directory")->required();
  add_config_flags(*train, global);

  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "score a trained run, with sparsity buckets");
  eval->add_option("--run", eval_opts.run, "run directory written by train")->required();
  eval->add_option("--data", eval_opts.data, "prepared dataset directory")->required();
  eval->add_option("--checkpoint", eval_opts.checkpoint, "best or final")->check(CLI::IsMember({"best", "final"}));
  eval->add_option("--export-reps", eval_opts.export_reps, "export h_t/h_s rows for this many sampled users");
  eval->add_flag("--export-specific-a", eval_opts.export_specific_a, "also export h_s of domain A");

  AblateOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "train the four variants with shared seeds");
  ablate->add_option("--data", ablate_opts.data, "prepared dataset directory")->required();
  ablate->add_option("--seeds", ablate_opts.seeds, "consecutive seeds starting at --seed")->capture_default_str();
  add_config_flags(*ablate, global);

  GradcheckOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every loss term");
  gradcheck->add_option("--d", gc.d)->capture_default_str();
  gradcheck->add_option("--n", gc.n)->capture_default_str();
  gradcheck->add_option("--tolerance", gc.tolerance)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  return guarded([&] {
    if (*prepare) cmd_prepare(global, prep);
    if (*train) cmd_train(global, train_opts);
    if (*eval) cmd_eval(global, eval_opts);
    if (*ablate) cmd_ablate(global, ablate_opts);
    if (*gradcheck && !cmd_gradcheck(global, gc)) return static_cast<int>(kRuntime);
    return static_cast<int>(kOk);
  });
}
