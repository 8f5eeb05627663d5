#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cloze::corpus {

struct DataError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// Four body sentences and one or two candidate endings. Unlabeled training
/// stories carry the gold fifth sentence as their only ending.
struct Story
{
  std::string id;
  std::array<std::string, 4> body;
  std::vector<std::string> endings;
  std::optional<int> label;
  // Free-form group tag (synthetic data uses it for the generating kind).
  std::string kind;

  bool labeled() const { return label.has_value(); }
  void validate() const;
};

/// Header: storyid, sentence1..sentence4, ending1, ending2, answer, with an
/// optional trailing `kind` column. Answers are 1-based in the file.
std::vector<Story> load_labeled(std::filesystem::path const &path);
/// Header: storyid, sentence1..sentence5.
std::vector<Story> load_unlabeled(std::filesystem::path const &path);

void write_labeled(std::filesystem::path const &path, std::vector<Story> const &stories);
void write_unlabeled(std::filesystem::path const &path, std::vector<Story> const &stories);

struct SplitSpec
{
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Split
{
  std::vector<Story> train;
  std::vector<Story> validation;
};

/// Seeded shuffle, then the first round(fraction * N) stories train.
Split split(std::vector<Story> const &stories, SplitSpec const &spec);

} // namespace cloze::corpus
