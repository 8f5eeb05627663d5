// Command-line front end: cloze <command> [--config FILE] [--seed N] [--out DIR] ...
#include "cloze/harness/commands.hpp"
#include "cloze/harness/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace cloze;

int main(int argc, char **argv)
{
  CLI::App app{"Story-ending selection with narrative, sentiment and knowledge channels"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  app.add_option("--config", config_path, "key = value run configuration");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  std::string checkpoint;
  auto *pretrain_lm = app.add_subcommand("pretrain-lm", "train the language model on data.unlabeled");
  auto *pretrain_sentiment = app.add_subcommand("pretrain-sentiment", "train the polarity predictor");
  auto *finetune = app.add_subcommand("finetune", "train the full model on data.train");
  auto *evaluate = app.add_subcommand("evaluate", "score data.test, write report.json");
  evaluate->add_option("--checkpoint", checkpoint, "model checkpoint (default checkpoint.model)");

  bool retrain = false;
  auto *ablate = app.add_subcommand("ablate", "single-channel and leave-one-out accuracies on data.test");
  ablate->add_option("--checkpoint", checkpoint, "model checkpoint (default checkpoint.model)");
  ablate->add_flag("--retrain", retrain, "refit the gate for each mask");

  std::string story_id;
  auto *inspect = app.add_subcommand("inspect", "gate decision for one story of data.test");
  inspect->add_option("--checkpoint", checkpoint, "model checkpoint (default checkpoint.model)");
  inspect->add_option("--story", story_id, "story id")->required();

  std::string kind = "mixed";
  int n = 100;
  int test_n = -1;
  auto *synth = app.add_subcommand("synth", "write a synthetic dataset with matching embeddings and lexicon");
  synth->add_option("--kind", kind, "knowledge, sentiment, narrative or mixed")->capture_default_str();
  synth->add_option("--n", n, "training stories")->capture_default_str();
  synth->add_option("--test-n", test_n, "test stories (default n / 2)");

  CLI11_PARSE(app, argc, argv);

  try {
    harness::RunConfig config;
    if (!config_path.empty()) { config = harness::load_config(config_path); }
    if (seed) { config.seed = *seed; }
    fs::path const out(out_dir);

    if (pretrain_lm->parsed()) {
      harness::cmd_pretrain_lm(config, out, &std::cerr);
    } else if (pretrain_sentiment->parsed()) {
      harness::cmd_pretrain_sentiment(config, out, &std::cerr);
    } else if (finetune->parsed()) {
      auto const r = harness::cmd_finetune(config, out, &std::cerr);
      std::cout << "validation accuracy " << r.validation.accuracy << " (" << r.validation.correct << "/"
                << r.validation.n << ")\n";
    } else if (evaluate->parsed()) {
      auto const r = harness::cmd_evaluate(config, checkpoint);
      fs::create_directories(out);
      harness::write_json(out / "report.json", harness::to_json(r));
      std::cout << "accuracy " << r.accuracy << " (" << r.correct << "/" << r.n << ")\n";
    } else if (ablate->parsed()) {
      auto const r = harness::cmd_ablate(config, checkpoint, retrain, &std::cerr);
      fs::create_directories(out);
      harness::write_json(out / "ablation.json", harness::to_json(r));
      std::cout << harness::format_ablation(r);
    } else if (inspect->parsed()) {
      std::cout << harness::to_json(harness::cmd_inspect(config, story_id, checkpoint)).dump(2) << '\n';
    } else if (synth->parsed()) {
      auto const files = harness::write_synthetic({harness::parse_synth_kind(kind), n, test_n, config.seed}, out);
      std::cout << "wrote " << files.config.string() << '\n';
    }
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
