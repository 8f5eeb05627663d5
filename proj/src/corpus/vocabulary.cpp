#include "cloze/corpus/vocabulary.hpp"

#include "cloze/corpus/tokenizer.hpp"

#include <algorithm>
#include <map>

namespace cloze::corpus {

namespace {
constexpr std::array<char const *, kReservedTokens> kReserved{"<unk>", "<pad>", "<start>", "<delim>", "<clf>"};
}

Vocabulary::Vocabulary()
  : Vocabulary(std::vector<std::string>{})
{
}

Vocabulary::Vocabulary(std::vector<std::string> const &regular_tokens)
{
  tokens_.reserve(kReservedTokens + regular_tokens.size());
  for (auto const *r : kReserved) { tokens_.emplace_back(r); }
  tokens_.insert(tokens_.end(), regular_tokens.begin(), regular_tokens.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw DataError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

int Vocabulary::id(std::string const &token) const
{
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::string const &Vocabulary::token(int id) const
{
  if (id < 0 || id >= size()) { throw DataError("vocabulary: id " + std::to_string(id) + " out of range"); }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocabulary::regular_tokens() const
{
  return {tokens_.begin() + kReservedTokens, tokens_.end()};
}

Vocabulary build_vocab(std::span<Story const> stories, int min_count)
{
  if (stories.empty()) { throw DataError("build_vocab: empty corpus"); }
  if (min_count < 1) { throw DataError("build_vocab: min_count must be positive"); }
  std::map<std::string, int> counts;
  auto add = [&](std::string const &sentence) {
    for (auto &t : tokenize(sentence)) { ++counts[t]; }
  };
  for (auto const &s : stories) {
    for (auto const &b : s.body) { add(b); }
    for (auto const &e : s.endings) { add(e); }
  }
  std::vector<std::pair<std::string, int>> kept;
  for (auto &[tok, n] : counts) {
    bool const reserved = std::any_of(kReserved.begin(), kReserved.end(), [&](char const *r) { return tok == r; });
    if (n >= min_count && !reserved) { kept.emplace_back(tok, n); }
  }
  std::stable_sort(kept.begin(), kept.end(), [](auto const &a, auto const &b) { return a.second > b.second; });
  std::vector<std::string> ordered;
  ordered.reserve(kept.size());
  for (auto &[tok, n] : kept) { ordered.push_back(tok); }
  return Vocabulary(ordered);
}

} // namespace cloze::corpus
