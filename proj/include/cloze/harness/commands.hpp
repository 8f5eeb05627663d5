#pragma once

#include "cloze/harness/config.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <vector>

namespace cloze::harness {

/// Vocabulary-independent resources named by the config; bundled lists fill
/// any path left empty. Without an embedding file the table is empty and
/// every knowledge distance is zero.
gate::Resources load_resources(RunConfig const &config, std::shared_ptr<corpus::Vocabulary const> vocabulary);

/// Labeled data, failing with the config key when the path is unset.
std::vector<corpus::Story> load_dataset(std::filesystem::path const &path, std::string const &key);

struct EvalReport
{
  double accuracy = 0.0;
  int n = 0;
  int correct = 0;
  std::vector<gate::FusedPrediction> stories;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

/// Predictions for every story; accuracy = correct / n.
EvalReport evaluate_model(gate::StoryModel const &model, std::span<gate::PreparedStory const> stories);

/// {accuracy, n, correct, seed, wall_seconds, config: {key: value},
///  stories: [inspection records]}.
nlohmann::json to_json(EvalReport const &report);
nlohmann::json to_json(gate::FusedPrediction const &record);
/// Writes pretty-printed JSON through a temporary file and a rename.
void write_json(std::filesystem::path const &path, nlohmann::json const &value);

/// Mean gate weights per `kind` tag (untagged stories under "").
std::map<std::string, std::array<double, 3>> gate_means_by_kind(EvalReport const &report);

struct LmPretrainReport
{
  narrative::PretrainResult result;
  std::filesystem::path checkpoint;
};

/// Builds the vocabulary from the unlabeled corpus (plus labeled training
/// data when configured), trains the language model and writes lm.ckpt.
LmPretrainReport cmd_pretrain_lm(RunConfig const &config, std::filesystem::path const &out_dir,
                                 std::ostream *log = nullptr);

struct SentimentPretrainReport
{
  sentiment::SentimentPretrainResult result;
  std::filesystem::path checkpoint;
};

/// Trains the polarity predictor on gold endings and writes sentiment.ckpt.
SentimentPretrainReport cmd_pretrain_sentiment(RunConfig const &config, std::filesystem::path const &out_dir,
                                               std::ostream *log = nullptr);

struct FinetuneReport
{
  std::vector<double> epoch_losses;
  std::vector<double> validation_accuracy;
  int best_epoch = 0; // 1-based; 0 when no epoch ran
  EvalReport validation;
  std::filesystem::path checkpoint;
};

/// Splits data.train into train and validation, trains every parameter of
/// the active channels plus the gate, halving (by default) the learning
/// rate after each epoch, and keeps the best-validation weights as model.ckpt.
FinetuneReport cmd_finetune(RunConfig const &config, std::filesystem::path const &out_dir,
                            std::ostream *log = nullptr);

/// Loads `checkpoint` (config.model_checkpoint when empty) and scores
/// data.test. A configured ablation mask overrides the trained one.
EvalReport cmd_evaluate(RunConfig const &config, std::filesystem::path const &checkpoint = {});

struct AblationRow
{
  gate::ChannelMask mask;
  double accuracy = 0.0;
};

struct AblationReport
{
  double full = 0.0;
  std::vector<AblationRow> single;        // one channel kept
  std::vector<AblationRow> leave_one_out; // one channel removed
  bool retrained = false;
};

/// Six masked evaluations next to the full model. By default the gate is
/// only renormalized over the kept channels; with `retrain` it is refit on
/// the training split for ablate.retrain_epochs first.
AblationReport cmd_ablate(RunConfig const &config, std::filesystem::path const &checkpoint = {}, bool retrain = false,
                          std::ostream *log = nullptr);
nlohmann::json to_json(AblationReport const &report);
/// Two plain-text tables (single channel, leave one out).
std::string format_ablation(AblationReport const &report);

/// Inspection record of one story of data.test.
gate::FusedPrediction cmd_inspect(RunConfig const &config, std::string const &story_id,
                                  std::filesystem::path const &checkpoint = {});

} // namespace cloze::harness
