#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cloze::knowledge {

/// Porter stem of a lowercase token.
std::string stem(std::string_view word);

class StopwordList
{
public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words);

  /// One lowercase token per line, '#' comments.
  static StopwordList load(std::filesystem::path const &path);
  /// data/stopwords.txt
  static StopwordList bundled();

  bool contains(std::string const &token) const { return words_.contains(token); }
  std::size_t size() const { return words_.size(); }

private:
  std::unordered_set<std::string> words_;
};

/// Tokens of `sentence` minus stopwords and pure punctuation, in order,
/// duplicates kept.
std::vector<std::string> extract_keywords(std::string_view sentence, StopwordList const &stopwords);

} // namespace cloze::knowledge
