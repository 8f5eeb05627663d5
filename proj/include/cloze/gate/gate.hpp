#pragma once

#include "cloze/autodiff/ops.hpp"
#include "cloze/autodiff/parameters.hpp"
#include "cloze/knowledge/distance.hpp"
#include "cloze/sentiment/polarity.hpp"

#include <array>
#include <optional>
#include <string>

namespace cloze::gate {

enum class Channel : int { narrative = 0, sentiment = 1, knowledge = 2 };
inline constexpr int kChannels = 3;
inline constexpr std::array<char const *, kChannels> kChannelNames{"narrative", "sentiment", "knowledge"};

/// Subset of channels taking part in a prediction. Never empty.
class ChannelMask
{
public:
  ChannelMask() = default;
  ChannelMask(bool narrative, bool sentiment, bool knowledge);

  /// Comma separated channel names, e.g. "narrative,knowledge"; "all" for every channel.
  static ChannelMask parse(std::string const &text);
  static ChannelMask only(Channel c);
  static ChannelMask without(Channel c);

  bool operator[](Channel c) const { return active_[static_cast<std::size_t>(c)]; }
  bool active(int c) const { return active_[static_cast<std::size_t>(c)]; }
  int count() const;
  bool full() const { return count() == kChannels; }
  std::string to_string() const;
  bool operator==(ChannelMask const &) const = default;

private:
  std::array<bool, kChannels> active_{true, true, true};
};

/// How the gate input g is formed.
///   candidates:  per channel, cosine between the two candidates' features
///                (<clf> states, ending polarities, distance vectors).
///   body_ending: per channel, cosine between a body-side and an ending-side
///                feature, averaged over the two candidates.
enum class GateFeatureVariant { candidates, body_ending };

GateFeatureVariant parse_gate_features(std::string const &name);
std::string to_string(GateFeatureVariant variant);

/// g = [cos(h1, h2), cos(E1, E2), cos(D1, D2)] as a 1 x 3 tensor. The
/// first component carries gradient into the hidden states.
ad::Tensor build_gate_features(ad::Tensor const &clf_hidden_1, ad::Tensor const &clf_hidden_2,
                               sentiment::SentimentVector const &ending_1, sentiment::SentimentVector const &ending_2,
                               knowledge::DistanceVector const &distance_1, knowledge::DistanceVector const &distance_2);

/// G = softmax(g W + b), restricted to (and renormalized over) the mask.
class CombinationGate
{
public:
  explicit CombinationGate(std::mt19937_64 &init_rng);

  ad::Tensor weights(ad::Tensor const &features, ChannelMask const &mask = {}) const;

  ad::NamedParameters named_parameters() const;
  ad::Tensor const &weight() const { return weight_; }
  ad::Tensor const &bias() const { return bias_; }

private:
  ad::Tensor weight_; // 3 x 3
  ad::Tensor bias_;   // 1 x 3
};

/// softmax over candidates of sum_c G_c * P_c(i). Each P is 1 x 2.
ad::Tensor fuse(ad::Tensor const &gate, ad::Tensor const &narrative, ad::Tensor const &sentiment,
                ad::Tensor const &knowledge);

/// Plain-number record of one decision.
struct FusedPrediction
{
  std::string story_id;
  std::array<double, 3> gate{};
  std::array<double, 2> narrative{};
  std::array<double, 2> sentiment{};
  std::array<double, 2> knowledge{};
  std::array<double, 2> fused{};
  int chosen = 0;
  std::optional<int> gold;
  std::string kind;
};

} // namespace cloze::gate
