#include "cloze/knowledge/distance.hpp"

namespace cloze::knowledge {

namespace {

struct Word
{
  std::string stem;
  std::optional<ad::RowVector> unit;
};

Word resolve(std::string const &token, EmbeddingTable const &table)
{
  Word w{stem(token), table.find(token)};
  if (w.unit) {
    double const n = w.unit->norm();
    if (n == 0.0) {
      w.unit.reset();
    } else {
      *w.unit /= n;
    }
  }
  return w;
}

} // namespace

DistanceVector knowledge_distance(std::array<Keywords, 4> const &body, Keywords const &ending,
                                  EmbeddingTable const &table)
{
  DistanceVector distance = DistanceVector::Zero();
  if (ending.empty()) { return distance; }
  std::vector<Word> ending_words;
  ending_words.reserve(ending.size());
  for (auto const &w : ending) { ending_words.push_back(resolve(w, table)); }

  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<Word> body_words;
    body_words.reserve(body[j].size());
    for (auto const &u : body[j]) { body_words.push_back(resolve(u, table)); }
    double total = 0.0;
    for (auto const &w : ending_words) {
      double best = 0.0;
      for (auto const &u : body_words) {
        if (w.stem == u.stem) { continue; }
        double const d = (w.unit && u.unit) ? std::min(1.0, w.unit->dot(*u.unit)) : 0.0;
        if (d > best) { best = d; }
      }
      total += best;
    }
    distance(static_cast<Eigen::Index>(j)) = total / static_cast<double>(ending_words.size());
  }
  return distance;
}

DistanceVector knowledge_distance(corpus::Story const &story, int ending_index, EmbeddingTable const &table,
                                  StopwordList const &stopwords)
{
  std::array<Keywords, 4> body;
  for (std::size_t j = 0; j < 4; ++j) { body[j] = extract_keywords(story.body[j], stopwords); }
  return knowledge_distance(body, extract_keywords(story.endings.at(static_cast<std::size_t>(ending_index)), stopwords),
                            table);
}

KnowledgeHead::KnowledgeHead(std::mt19937_64 &rng)
  : weight_(ad::normal_parameter(4, 1, rng))
  , bias_(ad::zero_parameter(1, 1))
{
}

ad::Tensor KnowledgeHead::score(DistanceVector const &distance) const
{
  return ad::matmul(ad::Tensor(ad::Matrix(distance)), weight_) + bias_;
}

ad::NamedParameters KnowledgeHead::named_parameters() const
{
  return {{"knowledge.weight", weight_}, {"knowledge.bias", bias_}};
}

} // namespace cloze::knowledge
