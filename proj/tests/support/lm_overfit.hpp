#pragma once

// Memorization run for the transformer: a few random sentences, trained until
// the per-token perplexity drops below a target.

#include "cloze/narrative/transformer.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace cloze::testing {

struct OverfitResult
{
  double perplexity = 0.0;
  int epochs = 0;
  double seconds = 0.0;
};

/// Every sentence opens on the same <start> token, so the first prediction
/// cannot beat ln(count) nats; sentences are made long enough for that to
/// average out below the target.
inline std::vector<corpus::TokenSequence> random_sentences(int count, int length, int words, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(corpus::kReservedTokens, corpus::kReservedTokens + words - 1);
  std::vector<corpus::TokenSequence> out(static_cast<std::size_t>(count));
  for (auto &s : out) {
    s.ids.push_back(corpus::kStart);
    for (int i = 0; i < length; ++i) { s.ids.push_back(pick(rng)); }
    s.ids.push_back(corpus::kClf);
  }
  return out;
}

inline OverfitResult overfit_lm(int layers, int dim, int sentences, int max_epochs, std::uint64_t seed,
                                double target_perplexity = 1.1)
{
  int const words = 120;
  int const length = 56;
  narrative::TransformerConfig config;
  config.layers = layers;
  config.heads = 4;
  config.model_dim = dim;
  config.window = length + 2;
  config.vocab_size = corpus::kReservedTokens + words;
  config.dropout = 0.0;
  std::mt19937_64 init(seed);
  narrative::TransformerLM model(config, init);
  auto const corpus = random_sentences(sentences, length, words, seed + 1);

  narrative::PretrainOptions options;
  options.epochs = max_epochs;
  options.batch_size = 4;
  options.adam.learning_rate = 3e-3;
  options.seed = seed;
  options.target_loss = std::log(target_perplexity) - 1e-3;

  auto const t0 = std::chrono::steady_clock::now();
  auto const result = narrative::pretrain_lm(model, corpus, options);
  OverfitResult r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.epochs = static_cast<int>(result.epoch_losses.size());
  r.perplexity = std::exp(narrative::corpus_lm_loss(model, corpus));
  return r;
}

} // namespace cloze::testing
