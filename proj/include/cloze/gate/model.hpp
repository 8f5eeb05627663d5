#pragma once

#include "cloze/gate/gate.hpp"
#include "cloze/io/checkpoint.hpp"
#include "cloze/narrative/scoring.hpp"
#include "cloze/sentiment/lstm.hpp"

#include <filesystem>
#include <memory>

namespace cloze::gate {

/// Read-only inputs shared by every story: vocabulary, sentiment lexicon,
/// embedding table and stopword list.
struct Resources
{
  std::shared_ptr<corpus::Vocabulary const> vocabulary;
  std::shared_ptr<sentiment::SentimentLexicon const> lexicon;
  std::shared_ptr<knowledge::EmbeddingTable const> embeddings;
  std::shared_ptr<knowledge::StopwordList const> stopwords;
};

inline constexpr double kDefaultLambda = 0.5;

struct ModelOptions
{
  narrative::EncodingMode encoding = narrative::EncodingMode::fullstory;
  GateFeatureVariant features = GateFeatureVariant::candidates;
  ChannelMask mask{};
  double lambda = kDefaultLambda;

  void validate() const;
};

/// Everything about one labeled story that does not depend on parameters.
struct PreparedStory
{
  std::string id;
  std::string kind;
  int label = -1;
  std::array<corpus::TokenSequence, 2> full_story;
  std::array<corpus::TokenSequence, 4> body_sentences;
  std::array<corpus::TokenSequence, 2> ending_sentences;
  sentiment::StoryPolarity polarity;
  std::array<knowledge::DistanceVector, 2> distance;
};

/// The three channels and the combination gate.
class StoryModel
{
public:
  StoryModel(narrative::TransformerLM narrative, sentiment::SentimentLstm sentiment, knowledge::KnowledgeHead knowledge,
             CombinationGate gate, Resources resources, ModelOptions options);

  /// Fresh parameters drawn from `init_rng` in a fixed order.
  static StoryModel create(narrative::TransformerConfig const &config, Resources resources, ModelOptions options,
                           std::mt19937_64 &init_rng);

  PreparedStory prepare(corpus::Story const &story) const;
  std::vector<PreparedStory> prepare(std::span<corpus::Story const> stories) const;

  struct Forward
  {
    ad::Tensor gate;      // 1 x 3
    ad::Tensor narrative; // 1 x 2, [0.5, 0.5] when the channel is off
    ad::Tensor sentiment;
    ad::Tensor knowledge;
    ad::Tensor fused;
    std::optional<ad::Tensor> lm_loss;
  };

  /// A null dropout rng in `options` means evaluation.
  Forward forward(PreparedStory const &story, narrative::ForwardOptions const &options = {},
                  bool with_lm_loss = false) const;

  FusedPrediction predict(PreparedStory const &story) const;

  /// -log P~(gold) plus lambda times the language-model loss of the
  /// candidate sequences (only while the narrative channel is on).
  ad::Tensor story_loss(PreparedStory const &story, double lambda, narrative::ForwardOptions const &options = {}) const;
  /// Sum of story_loss over a labeled batch.
  ad::Tensor total_loss(std::span<PreparedStory const> batch, double lambda,
                        narrative::ForwardOptions const &options = {}) const;

  ad::NamedParameters named_parameters() const;
  /// Parameters that receive gradient under the current mask.
  ad::NamedParameters trainable_parameters() const;

  ModelOptions const &options() const { return options_; }
  void set_mask(ChannelMask mask) { options_.mask = mask; }
  Resources const &resources() const { return resources_; }

  narrative::TransformerLM const &narrative() const { return narrative_; }
  sentiment::SentimentLstm const &sentiment() const { return sentiment_; }
  knowledge::KnowledgeHead const &knowledge() const { return knowledge_; }
  CombinationGate const &gate() const { return gate_; }

  /// Config, options, vocabulary and every parameter.
  io::Checkpoint to_checkpoint() const;
  /// The vocabulary comes from the checkpoint; `resources.vocabulary` is ignored.
  static StoryModel from_checkpoint(io::Checkpoint const &checkpoint, Resources resources);
  void save(std::filesystem::path const &path) const;
  static StoryModel load(std::filesystem::path const &path, Resources resources);
  /// Independent copy with its own parameter storage.
  StoryModel clone() const { return from_checkpoint(to_checkpoint(), resources_); }

private:
  narrative::TransformerLM narrative_;
  sentiment::SentimentLstm sentiment_;
  knowledge::KnowledgeHead knowledge_;
  CombinationGate gate_;
  Resources resources_;
  ModelOptions options_;
};

} // namespace cloze::gate
