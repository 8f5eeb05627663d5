#include "cloze/gate/gate.hpp"

#include <limits>
#include <sstream>

namespace cloze::gate {

ChannelMask::ChannelMask(bool narrative, bool sentiment, bool knowledge)
  : active_{narrative, sentiment, knowledge}
{
  if (count() == 0) { throw std::invalid_argument("channel mask must keep at least one channel"); }
}

ChannelMask ChannelMask::parse(std::string const &text)
{
  if (text == "all") { return {}; }
  if (text.find_first_not_of(" ,") == std::string::npos) { throw std::invalid_argument("empty channel mask"); }
  std::array<bool, kChannels> on{false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto const b = item.find_first_not_of(' ');
    auto const e = item.find_last_not_of(' ');
    if (b == std::string::npos) { continue; }
    item = item.substr(b, e - b + 1);
    bool found = false;
    for (int c = 0; c < kChannels; ++c) {
      if (item == kChannelNames[static_cast<std::size_t>(c)]) {
        on[static_cast<std::size_t>(c)] = true;
        found = true;
      }
    }
    if (!found) { throw std::invalid_argument("unknown channel '" + item + "' in mask '" + text + "'"); }
  }
  return ChannelMask(on[0], on[1], on[2]);
}

ChannelMask ChannelMask::only(Channel c)
{
  return ChannelMask(c == Channel::narrative, c == Channel::sentiment, c == Channel::knowledge);
}

ChannelMask ChannelMask::without(Channel c)
{
  return ChannelMask(c != Channel::narrative, c != Channel::sentiment, c != Channel::knowledge);
}

int ChannelMask::count() const
{
  int n = 0;
  for (bool a : active_) { n += a ? 1 : 0; }
  return n;
}

std::string ChannelMask::to_string() const
{
  std::string out;
  for (int c = 0; c < kChannels; ++c) {
    if (!active(c)) { continue; }
    if (!out.empty()) { out += ","; }
    out += kChannelNames[static_cast<std::size_t>(c)];
  }
  return out;
}

GateFeatureVariant parse_gate_features(std::string const &name)
{
  if (name == "candidates") { return GateFeatureVariant::candidates; }
  if (name == "body_ending") { return GateFeatureVariant::body_ending; }
  throw std::invalid_argument("unknown gate feature variant '" + name + "' (expected candidates or body_ending)");
}

std::string to_string(GateFeatureVariant variant)
{
  return variant == GateFeatureVariant::candidates ? "candidates" : "body_ending";
}

ad::Tensor build_gate_features(ad::Tensor const &clf_hidden_1, ad::Tensor const &clf_hidden_2,
                               sentiment::SentimentVector const &ending_1, sentiment::SentimentVector const &ending_2,
                               knowledge::DistanceVector const &distance_1, knowledge::DistanceVector const &distance_2)
{
  double const s = ad::cosine_similarity(ending_1.as_row(), ending_2.as_row()).value;
  double const k = ad::cosine_similarity(distance_1, distance_2).value;
  ad::Tensor const rest = ad::Tensor::row({s, k});
  return ad::concat_cols({ad::cosine_similarity(clf_hidden_1, clf_hidden_2), rest});
}

CombinationGate::CombinationGate(std::mt19937_64 &rng)
  : weight_(ad::normal_parameter(kChannels, kChannels, rng))
  , bias_(ad::zero_parameter(1, kChannels))
{
}

ad::Tensor CombinationGate::weights(ad::Tensor const &features, ChannelMask const &mask) const
{
  if (features.rows() != 1 || features.cols() != kChannels) {
    throw ad::ShapeError("gate features must be 1x3, got " + ad::to_string(features.shape()));
  }
  ad::Tensor logits = ad::matmul(features, weight_) + bias_;
  if (!mask.full()) {
    ad::Matrix off = ad::Matrix::Zero(1, kChannels);
    for (int c = 0; c < kChannels; ++c) {
      if (!mask.active(c)) { off(0, c) = -std::numeric_limits<double>::infinity(); }
    }
    logits = logits + ad::Tensor(std::move(off));
  }
  return ad::softmax(logits);
}

ad::NamedParameters CombinationGate::named_parameters() const
{
  return {{"gate.weight", weight_}, {"gate.bias", bias_}};
}

ad::Tensor fuse(ad::Tensor const &gate, ad::Tensor const &narrative, ad::Tensor const &sentiment,
                ad::Tensor const &knowledge)
{
  for (auto const *p : {&narrative, &sentiment, &knowledge}) {
    if (p->rows() != 1 || p->cols() != 2) {
      throw ad::ShapeError("fuse: channel distributions must be 1x2, got " + ad::to_string(p->shape()));
    }
  }
  return ad::softmax(ad::matmul(gate, ad::concat_rows({narrative, sentiment, knowledge})));
}

} // namespace cloze::gate
