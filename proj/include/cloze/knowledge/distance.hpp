#pragma once

#include "cloze/autodiff/ops.hpp"
#include "cloze/autodiff/parameters.hpp"
#include "cloze/corpus/story.hpp"
#include "cloze/knowledge/embeddings.hpp"
#include "cloze/knowledge/keywords.hpp"

#include <array>
#include <span>

namespace cloze::knowledge {

/// One alignment score in [0, 1] per body sentence.
using DistanceVector = Eigen::RowVector4d;

using Keywords = std::vector<std::string>;

/// For each body sentence: every ending keyword takes its best cosine
/// against that sentence's keywords, skipping pairs with equal stems and
/// starting from 0; the sentence's distance is the mean over ending keywords.
/// Words missing from the table have similarity 0. No ending keywords gives
/// the zero vector.
DistanceVector knowledge_distance(std::array<Keywords, 4> const &body, Keywords const &ending,
                                  EmbeddingTable const &table);

DistanceVector knowledge_distance(corpus::Story const &story, int ending_index, EmbeddingTable const &table,
                                  StopwordList const &stopwords);

/// Linear scorer w . D + b for one candidate.
class KnowledgeHead
{
public:
  explicit KnowledgeHead(std::mt19937_64 &init_rng);

  ad::Tensor score(DistanceVector const &distance) const;

  ad::NamedParameters named_parameters() const;
  ad::Tensor const &weight() const { return weight_; }
  ad::Tensor const &bias() const { return bias_; }

private:
  ad::Tensor weight_; // 4 x 1
  ad::Tensor bias_;   // 1 x 1
};

} // namespace cloze::knowledge
