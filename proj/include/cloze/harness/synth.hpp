#pragma once

#include "cloze/autodiff/tensor.hpp"
#include "cloze/corpus/story.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cloze::harness {

/// Which channel the correct ending is recoverable from.
///   knowledge: the correct ending names a word from the same embedding
///              cluster as one body keyword; the wrong one an unrelated cluster.
///   sentiment: the correct ending's polarity matches the fourth sentence.
///   narrative: the body walks four steps of a fixed event chain and the
///              correct ending is that chain's fifth step.
///   mixed:     the three kinds in turn, tagged in the `kind` column.
/// In each kind the other channels see nothing to tell the endings apart.
enum class SynthKind { knowledge, sentiment, narrative, mixed };

SynthKind parse_synth_kind(std::string const &name);
std::string to_string(SynthKind kind);

struct SynthOptions
{
  SynthKind kind = SynthKind::mixed;
  int n = 100;
  // Held-out stories from an independent stream; negative means n / 2.
  int test_n = -1;
  std::uint64_t seed = 0;
};

struct SyntheticData
{
  std::vector<corpus::Story> train;
  std::vector<corpus::Story> test;
  // The gold five-sentence version of every training story.
  std::vector<corpus::Story> unlabeled;
  std::vector<std::pair<std::string, ad::RowVector>> embeddings;
  std::vector<std::pair<std::string, double>> lexicon;
};

SyntheticData generate_synthetic(SynthOptions const &options);

struct SynthFiles
{
  std::filesystem::path train, test, unlabeled, embeddings, lexicon, boosters, negations, config;
};

/// Writes train.csv, test.csv, unlabeled.csv, embeddings.txt, lexicon.tsv,
/// boosters.tsv, negations.txt and a synth.conf naming them.
SynthFiles write_synthetic(SynthOptions const &options, std::filesystem::path const &dir);

} // namespace cloze::harness
