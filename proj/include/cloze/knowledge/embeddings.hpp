#pragma once

#include "cloze/autodiff/tensor.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cloze::knowledge {

/// Word vectors of one fixed dimension.
class EmbeddingTable
{
public:
  explicit EmbeddingTable(int dimension);

  void add(std::string word, ad::RowVector const &vector);

  int dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }
  bool contains(std::string const &word) const { return index_.contains(word); }
  /// Row of `word`, or nullopt when absent.
  std::optional<ad::RowVector> find(std::string const &word) const;
  /// Cosine of two words; 0 when either is absent or has zero norm.
  double similarity(std::string const &a, std::string const &b) const;

private:
  int dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<ad::RowVector> vectors_;
  std::vector<double> norms_;
};

/// Text table: first line "count dimension", then "word v1 .. vd" per line.
/// Files ending in .gz are read through zlib. With a filter, only listed
/// words are kept. Numberbatch-style "/c/en/word" keys are reduced to "word".
EmbeddingTable load_embeddings(std::filesystem::path const &path,
                               std::unordered_set<std::string> const *filter = nullptr);

void write_embeddings(std::filesystem::path const &path, std::vector<std::pair<std::string, ad::RowVector>> const &rows);

} // namespace cloze::knowledge
