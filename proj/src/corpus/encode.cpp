#include "cloze/corpus/encode.hpp"

#include "cloze/corpus/tokenizer.hpp"

namespace cloze::corpus {

namespace {

TokenSequence keep_tail(std::vector<int> ids, int window)
{
  if (window < 1) { throw DataError("context window must be positive"); }
  auto const w = static_cast<std::size_t>(window);
  if (ids.size() > w) { ids.erase(ids.begin(), ids.end() - static_cast<std::ptrdiff_t>(w)); }
  return {std::move(ids)};
}

std::string const &ending_at(Story const &story, int ending_index)
{
  if (ending_index < 0 || static_cast<std::size_t>(ending_index) >= story.endings.size()) {
    throw DataError("story " + story.id + ": no ending " + std::to_string(ending_index));
  }
  return story.endings[static_cast<std::size_t>(ending_index)];
}

void append(std::vector<int> &ids, std::string_view sentence, Vocabulary const &vocab)
{
  for (auto const &t : tokenize(sentence)) { ids.push_back(vocab.id(t)); }
}

} // namespace

std::vector<int> encode_tokens(std::string_view sentence, Vocabulary const &vocab)
{
  std::vector<int> ids;
  append(ids, sentence, vocab);
  return ids;
}

TokenSequence encode_full_story(Story const &story, int ending_index, Vocabulary const &vocab, int window)
{
  auto const &ending = ending_at(story, ending_index);
  std::vector<int> ids{kStart};
  for (auto const &s : story.body) { append(ids, s, vocab); }
  ids.push_back(kDelim);
  append(ids, ending, vocab);
  ids.push_back(kClf);
  return keep_tail(std::move(ids), window);
}

std::pair<TokenSequence, TokenSequence> encode_plot_end(Story const &story, int ending_index, Vocabulary const &vocab,
                                                        int window)
{
  auto const &ending = ending_at(story, ending_index);
  std::vector<int> body{kStart};
  for (auto const &s : story.body) { append(body, s, vocab); }
  body.push_back(kClf);
  return {keep_tail(std::move(body), window), encode_sentence(ending, vocab, window)};
}

TokenSequence encode_sentence(std::string_view sentence, Vocabulary const &vocab, int window)
{
  std::vector<int> ids{kStart};
  append(ids, sentence, vocab);
  ids.push_back(kClf);
  return keep_tail(std::move(ids), window);
}

} // namespace cloze::corpus
