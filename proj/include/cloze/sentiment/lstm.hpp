#pragma once

#include "cloze/autodiff/adam.hpp"
#include "cloze/autodiff/ops.hpp"
#include "cloze/autodiff/parameters.hpp"
#include "cloze/corpus/story.hpp"
#include "cloze/sentiment/polarity.hpp"

#include <array>
#include <functional>
#include <span>

namespace cloze::sentiment {

inline constexpr int kSentimentHidden = 64;

/// Four-gate LSTM over the body's polarity vectors, a softmax output layer
/// predicting the ending's polarity, and a 3 x 3 bilinear similarity.
class SentimentLstm
{
public:
  explicit SentimentLstm(std::mt19937_64 &init_rng, int hidden = kSentimentHidden);

  /// E_p: softmax(W h_4 + b) after consuming E_1..E_4 from a zero state.
  /// Returned as a 1 x 3 tensor.
  ad::Tensor predict(std::span<SentimentVector const> body) const;
  /// E_p^T W_s E_e as a 1 x 1 tensor.
  ad::Tensor score(ad::Tensor const &predicted, SentimentVector const &ending) const;

  ad::NamedParameters named_parameters() const;
  /// LSTM and output layer only (what polarity pretraining updates).
  ad::NamedParameters predictor_parameters() const;
  ad::Tensor const &similarity() const { return similarity_; }
  int hidden_size() const { return hidden_; }

private:
  int hidden_;
  ad::Tensor input_weight_;  // 3 x 4H, gate order i, f, g, o
  ad::Tensor hidden_weight_; // H x 4H
  ad::Tensor gate_bias_;     // 1 x 4H
  ad::Tensor out_weight_;    // H x 3
  ad::Tensor out_bias_;      // 1 x 3
  ad::Tensor similarity_;    // 3 x 3
};

SentimentVector to_sentiment_vector(ad::Tensor const &row);

/// Polarity vectors of the four body sentences and of every ending.
struct StoryPolarity
{
  std::array<SentimentVector, 4> body;
  std::vector<SentimentVector> endings;
};

StoryPolarity story_polarity(corpus::Story const &story, SentimentLexicon const &lexicon);

struct SentimentPretrainOptions
{
  int epochs = 1;
  int batch_size = 8;
  ad::AdamOptions adam{};
  double lr_decay = 1.0;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  std::function<void(int epoch, double mean_similarity)> on_epoch;
};

struct SentimentPretrainResult
{
  double initial_similarity = 0.0;
  std::vector<double> epoch_similarities;
};

/// Mean cos(E_p, E_5) over stories whose ending slot 0 holds the gold ending.
double mean_similarity(SentimentLstm const &model, std::span<StoryPolarity const> stories);

/// Maximizes mean cos(E_p, E_5) by minimizing its negation.
SentimentPretrainResult pretrain_sentiment(SentimentLstm &model, std::span<StoryPolarity const> stories,
                                           SentimentPretrainOptions const &options);

} // namespace cloze::sentiment
