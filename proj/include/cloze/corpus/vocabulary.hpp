#pragma once

#include "cloze/corpus/story.hpp"

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cloze::corpus {

enum SpecialToken : int { kUnk = 0, kPad = 1, kStart = 2, kDelim = 3, kClf = 4 };
inline constexpr int kReservedTokens = 5;

class Vocabulary
{
public:
  /// Reserved tokens only.
  Vocabulary();
  /// Tokens in id order after the reserved block. Throws on duplicates.
  explicit Vocabulary(std::vector<std::string> const &regular_tokens);

  int id(std::string const &token) const;
  std::string const &token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(std::string const &token) const { return index_.contains(token); }

  /// Non-reserved tokens in id order (what a checkpoint stores).
  std::vector<std::string> regular_tokens() const;

  bool operator==(Vocabulary const &other) const { return tokens_ == other.tokens_; }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Word frequencies over every sentence of every story; tokens seen at least
/// `min_count` times get ids ordered by (frequency desc, token asc).
Vocabulary build_vocab(std::span<Story const> stories, int min_count = 1);

} // namespace cloze::corpus
