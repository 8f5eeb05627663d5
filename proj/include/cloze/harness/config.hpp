#pragma once

#include "cloze/gate/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cloze::harness {

struct ConfigError : std::invalid_argument
{
  using std::invalid_argument::invalid_argument;
};

/// Everything a command needs. Read from a flat `key = value` file; see
/// README for the key list. Relative paths resolve against the file's
/// directory.
struct RunConfig
{
  // Data. Empty paths mean "not configured" (or "bundled" for the lists).
  std::filesystem::path train_data;
  std::filesystem::path test_data;
  std::filesystem::path unlabeled_data;
  std::filesystem::path embeddings;
  std::filesystem::path lexicon;
  std::filesystem::path boosters;
  std::filesystem::path negations;
  std::filesystem::path stopwords;

  std::filesystem::path lm_checkpoint;
  std::filesystem::path sentiment_checkpoint;
  std::filesystem::path model_checkpoint;

  narrative::TransformerConfig transformer{};
  int min_count = 1;

  double learning_rate = 1e-3;
  double lr_decay = 0.5;
  int batch_size = 8;
  int epochs = 3;
  double clip_norm = 1.0;
  double train_fraction = 0.8;
  // Epochs at the start of fine-tuning during which the gate stays at its
  // (near-uniform) initialization while the channels train.
  int gate_warmup = 0;

  double lambda = gate::kDefaultLambda;
  narrative::EncodingMode encoding = narrative::EncodingMode::fullstory;
  gate::GateFeatureVariant gate_features = gate::GateFeatureVariant::candidates;
  // Unset means "all" for training and "as trained" for evaluation.
  std::optional<gate::ChannelMask> mask;

  int lm_epochs = 10;
  double lm_learning_rate = 1e-3;
  double lm_lr_decay = 1.0;
  int sentiment_epochs = 10;
  double sentiment_learning_rate = 1e-3;
  int retrain_epochs = 2;

  std::uint64_t seed = 0;

  void validate() const;
  gate::ModelOptions model_options() const;
  /// Every key with its current value, for report echoes.
  std::map<std::string, std::string> to_map() const;
};

/// Later assignments of a key override earlier ones. Unknown keys, malformed
/// lines and bad values throw ConfigError naming the line.
RunConfig parse_config(std::string_view text, std::filesystem::path const &base_dir = {}, RunConfig config = {});
RunConfig load_config(std::filesystem::path const &path, RunConfig config = {});

} // namespace cloze::harness
