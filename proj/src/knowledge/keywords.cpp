#include "cloze/knowledge/keywords.hpp"

#include "cloze/corpus/story.hpp"
#include "cloze/corpus/tokenizer.hpp"
#include "cloze/io/data_dir.hpp"

#include <fstream>

namespace cloze::knowledge {

StopwordList::StopwordList(std::unordered_set<std::string> words)
  : words_(std::move(words))
{
}

StopwordList StopwordList::load(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) { throw corpus::DataError("cannot open " + path.string()); }
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') { line.pop_back(); }
    if (line.empty() || line.front() == '#') { continue; }
    words.insert(line);
  }
  return StopwordList(std::move(words));
}

StopwordList StopwordList::bundled() { return load(io::data_dir() / "stopwords.txt"); }

std::vector<std::string> extract_keywords(std::string_view sentence, StopwordList const &stopwords)
{
  std::vector<std::string> out;
  for (auto &t : corpus::tokenize(sentence)) {
    if (corpus::is_punctuation(t) || stopwords.contains(t)) { continue; }
    out.push_back(std::move(t));
  }
  return out;
}

} // namespace cloze::knowledge
