#pragma once

#include "cloze/corpus/story.hpp"
#include "cloze/corpus/vocabulary.hpp"

#include <string_view>
#include <utility>
#include <vector>

namespace cloze::corpus {

inline constexpr int kDefaultWindow = 128;

struct TokenSequence
{
  std::vector<int> ids;

  std::size_t size() const { return ids.size(); }
  bool operator==(TokenSequence const &) const = default;
};

std::vector<int> encode_tokens(std::string_view sentence, Vocabulary const &vocab);

/// <start> s1..s4 <delim> ending <clf>, keeping the last `window` tokens.
TokenSequence encode_full_story(Story const &story, int ending_index, Vocabulary const &vocab,
                                int window = kDefaultWindow);

/// (<start> s1..s4 <clf>, <start> ending <clf>), each front-truncated.
std::pair<TokenSequence, TokenSequence> encode_plot_end(Story const &story, int ending_index,
                                                        Vocabulary const &vocab, int window = kDefaultWindow);

/// <start> sentence <clf>, front-truncated.
TokenSequence encode_sentence(std::string_view sentence, Vocabulary const &vocab, int window = kDefaultWindow);

} // namespace cloze::corpus
