#include "cloze/sentiment/polarity.hpp"

#include "cloze/corpus/story.hpp"
#include "cloze/corpus/tokenizer.hpp"
#include "cloze/io/data_dir.hpp"

#include <cmath>
#include <fstream>
#include <vector>

namespace cloze::sentiment {

namespace {

template <typename Fn>
void for_each_entry(std::filesystem::path const &path, Fn &&fn)
{
  std::ifstream in(path);
  if (!in) { throw corpus::DataError("cannot open " + path.string()); }
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') { line.pop_back(); }
    if (line.empty() || line.front() == '#') { continue; }
    fn(line, number);
  }
}

std::pair<std::string, double> token_and_value(std::string const &line, std::size_t number,
                                               std::filesystem::path const &path)
{
  auto const tab = line.find('\t');
  if (tab == std::string::npos) {
    throw corpus::DataError(path.string() + ":" + std::to_string(number) + ": expected token<TAB>value");
  }
  try {
    std::size_t used = 0;
    double const v = std::stod(line.substr(tab + 1), &used);
    return {line.substr(0, tab), v};
  } catch (std::exception const &) {
    throw corpus::DataError(path.string() + ":" + std::to_string(number) + ": bad number");
  }
}

} // namespace

SentimentLexicon SentimentLexicon::load(std::filesystem::path const &lexicon, std::filesystem::path const &boosters,
                                        std::filesystem::path const &negations)
{
  SentimentLexicon lex;
  for_each_entry(lexicon, [&](std::string const &line, std::size_t n) {
    auto [tok, v] = token_and_value(line, n, lexicon);
    lex.set_valence(std::move(tok), v);
  });
  for_each_entry(boosters, [&](std::string const &line, std::size_t n) {
    auto [tok, v] = token_and_value(line, n, boosters);
    lex.set_booster(std::move(tok), v);
  });
  for_each_entry(negations, [&](std::string const &line, std::size_t) { lex.add_negation(line); });
  return lex;
}

SentimentLexicon SentimentLexicon::bundled()
{
  auto const dir = io::data_dir();
  return load(dir / "lexicon.tsv", dir / "boosters.tsv", dir / "negations.txt");
}

void SentimentLexicon::set_valence(std::string token, double valence)
{
  if (!(valence >= -4.0 && valence <= 4.0)) {
    throw corpus::DataError("lexicon: valence of '" + token + "' outside [-4, 4]");
  }
  valences_[std::move(token)] = valence;
}

void SentimentLexicon::set_booster(std::string token, double increment)
{
  if (!(increment >= -1.0 && increment <= 1.0)) {
    throw corpus::DataError("lexicon: booster '" + token + "' increment outside [-1, 1]");
  }
  boosters_[std::move(token)] = increment;
}

void SentimentLexicon::add_negation(std::string token) { negations_.insert(std::move(token)); }

double SentimentLexicon::valence(std::string const &token) const
{
  auto it = valences_.find(token);
  return it == valences_.end() ? 0.0 : it->second;
}

double SentimentLexicon::booster(std::string const &token) const
{
  auto it = boosters_.find(token);
  return it == boosters_.end() ? 0.0 : it->second;
}

SentimentVector sentence_polarity(std::string_view sentence, SentimentLexicon const &lexicon)
{
  std::vector<std::string> words;
  for (auto &t : corpus::tokenize(sentence)) {
    if (!corpus::is_punctuation(t)) { words.push_back(std::move(t)); }
  }
  double pos = 0.0;
  double neg = 0.0;
  double neu = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    double v = lexicon.valence(words[i]);
    if (v != 0.0) {
      if (i > 0) {
        double const b = lexicon.booster(words[i - 1]);
        v += v > 0.0 ? b : -b;
      }
      for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
        if (lexicon.is_negation(words[i - back])) {
          v *= kNegationFactor;
          break;
        }
      }
    }
    if (v > 0.0) {
      pos += v + 1.0;
    } else if (v < 0.0) {
      neg += std::abs(v) + 1.0;
    } else {
      neu += 1.0;
    }
  }
  double const total = pos + neg + neu;
  if (total == 0.0) { return {0.0, 0.0, 1.0}; }
  return {pos / total, neg / total, neu / total};
}

} // namespace cloze::sentiment
