#pragma once

// Small random stories with a hand-made lexicon, stopword list and embedding
// table, plus a tiny model over them, for tests that need a whole pipeline.

#include "cloze/gate/model.hpp"

#include <random>
#include <unordered_set>

namespace cloze::testing {

struct ToyWorld
{
  std::vector<corpus::Story> stories;
  gate::Resources resources;

  /// Sentences of "Sam" plus 2..max_words random words.
  static ToyWorld make(std::uint64_t seed, int count = 6, std::size_t max_words = 5)
  {
    static std::vector<std::string> const words = {"dog",  "cat",  "ball", "park", "happy", "sad",  "ran",
                                                   "lost", "found", "good", "bad",  "tree",  "rain", "sun",
                                                   "not",  "very", "the",  "friend", "home", "lake"};
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto sentence = [&] {
      std::string s = "Sam";
      std::size_t const n = 2 + pick(max_words - 1);
      for (std::size_t i = 0; i < n; ++i) { s += " " + words[pick(words.size())]; }
      return s + ".";
    };
    ToyWorld w;
    for (int i = 0; i < count; ++i) {
      corpus::Story s;
      s.id = "toy-" + std::to_string(i);
      for (auto &b : s.body) { b = sentence(); }
      s.endings = {sentence(), sentence()};
      s.label = static_cast<int>(pick(2));
      w.stories.push_back(std::move(s));
    }

    auto lexicon = std::make_shared<sentiment::SentimentLexicon>();
    lexicon->set_valence("happy", 2.7);
    lexicon->set_valence("good", 1.9);
    lexicon->set_valence("sad", -2.1);
    lexicon->set_valence("bad", -2.5);
    lexicon->set_valence("lost", -1.3);
    lexicon->set_booster("very", 0.293);
    lexicon->add_negation("not");

    auto table = std::make_shared<knowledge::EmbeddingTable>(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < words.size(); i += 2) {
      ad::RowVector v(6);
      for (ad::Index d = 0; d < 6; ++d) { v(d) = normal(rng); }
      table->add(words[i], v);
    }

    w.resources.vocabulary = std::make_shared<corpus::Vocabulary const>(corpus::build_vocab(w.stories));
    w.resources.lexicon = lexicon;
    w.resources.embeddings = table;
    w.resources.stopwords =
      std::make_shared<knowledge::StopwordList const>(std::unordered_set<std::string>{"the", "a", "not", "very"});
    return w;
  }

  gate::ModelOptions options(gate::ChannelMask mask) const
  {
    gate::ModelOptions o;
    o.mask = mask;
    return o;
  }

  int model_dim = 8;
  int window = 48;

  narrative::TransformerConfig tiny_config() const
  {
    narrative::TransformerConfig c;
    c.layers = 1;
    c.heads = 2;
    c.model_dim = model_dim;
    c.window = window;
    c.dropout = 0.0;
    c.vocab_size = resources.vocabulary->size();
    return c;
  }

  /// One-layer transformer (dim 8 unless changed) and a hidden-4 LSTM.
  gate::StoryModel tiny_model(std::uint64_t seed, gate::ModelOptions const &o) const
  {
    std::mt19937_64 rng(seed);
    narrative::TransformerLM lm(tiny_config(), rng);
    sentiment::SentimentLstm lstm(rng, 4);
    knowledge::KnowledgeHead head(rng);
    gate::CombinationGate g(rng);
    return gate::StoryModel(std::move(lm), std::move(lstm), std::move(head), std::move(g), resources, o);
  }

  gate::StoryModel tiny_model(std::uint64_t seed, gate::ChannelMask mask) const
  {
    return tiny_model(seed, options(mask));
  }
};

} // namespace cloze::testing
