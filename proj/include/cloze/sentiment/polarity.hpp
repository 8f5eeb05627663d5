#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace cloze::sentiment {

/// Token valences in [-4, 4], booster increments in [-1, 1] and a negation
/// set. Loaded once, read-only afterwards.
class SentimentLexicon
{
public:
  SentimentLexicon() = default;

  /// lexicon: "token<TAB>valence" lines, '#' comments. boosters: "token<TAB>increment".
  /// negations: one token per line.
  static SentimentLexicon load(std::filesystem::path const &lexicon, std::filesystem::path const &boosters,
                               std::filesystem::path const &negations);
  /// The lexicon shipped under data/.
  static SentimentLexicon bundled();

  void set_valence(std::string token, double valence);
  void set_booster(std::string token, double increment);
  void add_negation(std::string token);

  double valence(std::string const &token) const;
  double booster(std::string const &token) const;
  bool is_negation(std::string const &token) const { return negations_.contains(token); }
  std::size_t size() const { return valences_.size(); }

private:
  std::unordered_map<std::string, double> valences_;
  std::unordered_map<std::string, double> boosters_;
  std::unordered_set<std::string> negations_;
};

inline constexpr double kNegationFactor = -0.74;
inline constexpr int kNegationWindow = 3;

/// (positive, negative, neutral) proportions of one sentence.
struct SentimentVector
{
  double pos = 0.0;
  double neg = 0.0;
  double neu = 1.0;

  Eigen::RowVector3d as_row() const { return {pos, neg, neu}; }
  bool operator==(SentimentVector const &) const = default;
};

/// Rules, over word tokens (tokens with at least one letter or digit):
///   v = lexicon valence of the token (0 if unknown);
///   if v != 0 and the previous word is a booster b: v += sign(v) * b;
///   if v != 0 and a negation occurs among the previous 3 words: v *= -0.74;
///   pos = sum(v + 1 | v > 0), neg = sum(|v| + 1 | v < 0), neu = #(v == 0).
/// The triple is normalized to sum 1; a sentence with no words is (0, 0, 1).
SentimentVector sentence_polarity(std::string_view sentence, SentimentLexicon const &lexicon);

} // namespace cloze::sentiment
