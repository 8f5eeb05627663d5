#pragma once

// Brute-force restatement of the knowledge distance, kept deliberately naive:
// enumerate every (ending keyword, body keyword) pair and look vectors up
// directly, with no shared code beyond the stemmer.

#include "cloze/knowledge/distance.hpp"

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace cloze::testing {

using WordVectors = std::map<std::string, std::vector<double>>;

inline double oracle_cosine(WordVectors const &table, std::string const &a, std::string const &b)
{
  auto ia = table.find(a);
  auto ib = table.find(b);
  if (ia == table.end() || ib == table.end()) { return 0.0; }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < ia->second.size(); ++i) {
    dot += ia->second[i] * ib->second[i];
    na += ia->second[i] * ia->second[i];
    nb += ib->second[i] * ib->second[i];
  }
  if (na == 0.0 || nb == 0.0) { return 0.0; }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::array<double, 4> oracle_distance(std::array<std::vector<std::string>, 4> const &body,
                                             std::vector<std::string> const &ending, WordVectors const &table)
{
  std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
  if (ending.empty()) { return out; }
  for (std::size_t j = 0; j < 4; ++j) {
    double sum = 0.0;
    for (auto const &w : ending) {
      double max_d = 0.0;
      for (auto const &u : body[j]) {
        if (knowledge::stem(w) == knowledge::stem(u)) { continue; }
        double const d = oracle_cosine(table, w, u);
        if (d > max_d) { max_d = d; }
      }
      sum += max_d;
    }
    out[j] = sum / static_cast<double>(ending.size());
  }
  return out;
}

/// Random table over `words` (some left out to exercise missing entries)
/// and matching EmbeddingTable.
struct RandomTable
{
  std::vector<std::string> words;
  WordVectors vectors;
  knowledge::EmbeddingTable table{1};
};

inline RandomTable random_table(std::mt19937_64 &rng, int word_count, int dim)
{
  RandomTable r;
  r.table = knowledge::EmbeddingTable(dim);
  // Pairs that share a stem ("walk"/"walking") make the skip rule fire.
  std::vector<std::string> const roots = {"walk", "jump", "cook", "play", "rain", "talk", "help", "paint", "clean", "call"};
  for (int i = 0; i < word_count; ++i) {
    auto const &root = roots[static_cast<std::size_t>(i / 2) % roots.size()];
    std::string w = root + (i % 2 == 0 ? "" : "ing");
    if (i >= 2 * static_cast<int>(roots.size())) { w += "x" + std::to_string(i); }
    r.words.push_back(w);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution present(0.85);
  for (auto const &w : r.words) {
    if (!present(rng)) { continue; }
    std::vector<double> v(static_cast<std::size_t>(dim));
    ad::RowVector row(dim);
    for (int d = 0; d < dim; ++d) { row(d) = v[static_cast<std::size_t>(d)] = normal(rng); }
    r.vectors[w] = v;
    r.table.add(w, row);
  }
  return r;
}

inline std::vector<std::string> random_keywords(std::mt19937_64 &rng, std::vector<std::string> const &words,
                                                int max_count)
{
  std::vector<std::string> out;
  int const n = std::uniform_int_distribution<int>(0, max_count)(rng);
  for (int i = 0; i < n; ++i) { out.push_back(words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)]); }
  return out;
}

} // namespace cloze::testing
