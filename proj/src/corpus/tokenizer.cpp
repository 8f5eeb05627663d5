#include "cloze/corpus/tokenizer.hpp"

#include <cctype>

namespace cloze::corpus {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string normalize(std::string_view in)
{
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in.compare(i, 3, "\xE2\x80\x99") == 0) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(in[i]))));
  }
  return out;
}

} // namespace

std::vector<std::string> tokenize(std::string_view sentence)
{
  std::string const text = normalize(sentence);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  auto word_run = [&](std::size_t from) {
    std::size_t j = from;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) { ++j; }
    return j;
  };
  while (i < text.size()) {
    auto const c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t const j = word_run(i);
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (c == '\'' && i + 1 < text.size() && is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t const j = word_run(i + 1);
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      tokens.emplace_back(1, text[i]);
      ++i;
    }
  }
  return tokens;
}

bool is_punctuation(std::string_view token)
{
  for (unsigned char c : token) {
    if (is_word_byte(c)) { return false; }
  }
  return !token.empty();
}

} // namespace cloze::corpus
