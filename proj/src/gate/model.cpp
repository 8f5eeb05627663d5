#include "cloze/gate/model.hpp"

#include "cloze/io/checkpoint.hpp"

#include <cstdio>

namespace cloze::gate {

using ad::Tensor;

namespace {

Tensor uniform_pair() { return Tensor::row({0.5, 0.5}); }

Tensor pair_softmax(Tensor const &first, Tensor const &second) { return ad::softmax(ad::concat_cols({first, second})); }

void append(ad::NamedParameters &to, ad::NamedParameters const &from) { to.insert(to.end(), from.begin(), from.end()); }

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

void ModelOptions::validate() const
{
  if (!(lambda >= 0.0)) { throw std::invalid_argument("lambda must be non-negative"); }
  if (mask.count() == 0) { throw std::invalid_argument("ablation mask must keep at least one channel"); }
}

StoryModel::StoryModel(narrative::TransformerLM narrative, sentiment::SentimentLstm sentiment,
                       knowledge::KnowledgeHead knowledge, CombinationGate gate, Resources resources,
                       ModelOptions options)
  : narrative_(std::move(narrative))
  , sentiment_(std::move(sentiment))
  , knowledge_(std::move(knowledge))
  , gate_(std::move(gate))
  , resources_(std::move(resources))
  , options_(options)
{
  options_.validate();
  if (!resources_.vocabulary || !resources_.lexicon || !resources_.embeddings || !resources_.stopwords) {
    throw std::invalid_argument("story model: every resource must be provided");
  }
  if (resources_.vocabulary->size() != narrative_.config().vocab_size) {
    throw std::invalid_argument("story model: vocabulary has " + std::to_string(resources_.vocabulary->size()) +
                                " tokens, transformer expects " + std::to_string(narrative_.config().vocab_size));
  }
}

StoryModel StoryModel::create(narrative::TransformerConfig const &config, Resources resources, ModelOptions options,
                              std::mt19937_64 &rng)
{
  narrative::TransformerLM lm(config, rng);
  sentiment::SentimentLstm lstm(rng);
  knowledge::KnowledgeHead head(rng);
  CombinationGate gate(rng);
  return StoryModel(std::move(lm), std::move(lstm), std::move(head), std::move(gate), std::move(resources), options);
}

PreparedStory StoryModel::prepare(corpus::Story const &story) const
{
  story.validate();
  if (!story.labeled()) { throw corpus::DataError("story " + story.id + ": the model scores labeled stories only"); }
  auto const &vocab = *resources_.vocabulary;
  int const window = narrative_.config().window;
  PreparedStory p;
  p.id = story.id;
  p.kind = story.kind;
  p.label = *story.label;
  for (int i = 0; i < 2; ++i) {
    auto const ui = static_cast<std::size_t>(i);
    p.full_story[ui] = corpus::encode_full_story(story, i, vocab, window);
    p.ending_sentences[ui] = corpus::encode_sentence(story.endings[ui], vocab, window);
    p.distance[ui] = knowledge::knowledge_distance(story, i, *resources_.embeddings, *resources_.stopwords);
  }
  for (std::size_t j = 0; j < 4; ++j) { p.body_sentences[j] = corpus::encode_sentence(story.body[j], vocab, window); }
  p.polarity = sentiment::story_polarity(story, *resources_.lexicon);
  return p;
}

std::vector<PreparedStory> StoryModel::prepare(std::span<corpus::Story const> stories) const
{
  std::vector<PreparedStory> out;
  out.reserve(stories.size());
  for (auto const &s : stories) { out.push_back(prepare(s)); }
  return out;
}

StoryModel::Forward StoryModel::forward(PreparedStory const &story, narrative::ForwardOptions const &options,
                                        bool with_lm_loss) const
{
  auto const &mask = options_.mask;
  bool const lm = with_lm_loss && mask[Channel::narrative];
  Forward f{Tensor(), uniform_pair(), uniform_pair(), uniform_pair(), Tensor(), std::nullopt};
  Tensor narrative_feature = Tensor::scalar(0.0);
  double sentiment_feature = 0.0;
  double knowledge_feature = 0.0;
  bool const candidate_features = options_.features == GateFeatureVariant::candidates;

  if (mask[Channel::narrative]) {
    std::array<narrative::CandidateScore, 2> scores;
    std::vector<Tensor> lm_losses;
    if (options_.encoding == narrative::EncodingMode::fullstory) {
      for (std::size_t i = 0; i < 2; ++i) {
        scores[i] = narrative::score_ending_fullstory(narrative_, story.full_story[i], options, lm);
      }
    } else {
      auto const body = narrative::encode_plot_body(narrative_, story.body_sentences, options, lm);
      if (body.lm_loss) { lm_losses.push_back(*body.lm_loss); }
      for (std::size_t i = 0; i < 2; ++i) {
        scores[i] = narrative::score_ending_plotend(narrative_, body, story.ending_sentences[i], options, lm);
      }
    }
    for (auto const &s : scores) {
      if (s.lm_loss) { lm_losses.push_back(*s.lm_loss); }
    }
    if (!lm_losses.empty()) { f.lm_loss = ad::mean(ad::concat_cols(lm_losses)); }
    f.narrative = pair_softmax(scores[0].logit, scores[1].logit);
    if (candidate_features) {
      narrative_feature = ad::cosine_similarity(scores[0].clf_hidden, scores[1].clf_hidden);
    } else {
      narrative_feature = ad::scale(ad::cosine_similarity(scores[0].body_hidden, scores[0].clf_hidden) +
                                      ad::cosine_similarity(scores[1].body_hidden, scores[1].clf_hidden),
                                    0.5);
    }
  }

  if (mask[Channel::sentiment]) {
    Tensor const predicted = sentiment_.predict(story.polarity.body);
    auto const &e = story.polarity.endings;
    f.sentiment = pair_softmax(sentiment_.score(predicted, e[0]), sentiment_.score(predicted, e[1]));
    if (candidate_features) {
      sentiment_feature = ad::cosine_similarity(e[0].as_row(), e[1].as_row()).value;
    } else {
      auto const p = sentiment::to_sentiment_vector(predicted).as_row();
      sentiment_feature =
        0.5 * (ad::cosine_similarity(p, e[0].as_row()).value + ad::cosine_similarity(p, e[1].as_row()).value);
    }
  }

  if (mask[Channel::knowledge]) {
    f.knowledge = pair_softmax(knowledge_.score(story.distance[0]), knowledge_.score(story.distance[1]));
    if (candidate_features) {
      knowledge_feature = ad::cosine_similarity(story.distance[0], story.distance[1]).value;
    } else {
      knowledge_feature = 0.5 * (story.distance[0].mean() + story.distance[1].mean());
    }
  }

  Tensor const g = ad::concat_cols({narrative_feature, Tensor::row({sentiment_feature, knowledge_feature})});
  f.gate = gate_.weights(g, mask);
  f.fused = fuse(f.gate, f.narrative, f.sentiment, f.knowledge);
  return f;
}

FusedPrediction StoryModel::predict(PreparedStory const &story) const
{
  ad::NoGradGuard guard;
  auto const f = forward(story);
  FusedPrediction p;
  p.story_id = story.id;
  p.kind = story.kind;
  for (int c = 0; c < kChannels; ++c) { p.gate[static_cast<std::size_t>(c)] = f.gate.value()(0, c); }
  for (int i = 0; i < 2; ++i) {
    auto const ui = static_cast<std::size_t>(i);
    p.narrative[ui] = f.narrative.value()(0, i);
    p.sentiment[ui] = f.sentiment.value()(0, i);
    p.knowledge[ui] = f.knowledge.value()(0, i);
    p.fused[ui] = f.fused.value()(0, i);
  }
  p.chosen = p.fused[1] > p.fused[0] ? 1 : 0;
  if (story.label >= 0) { p.gold = story.label; }
  return p;
}

Tensor StoryModel::story_loss(PreparedStory const &story, double lambda, narrative::ForwardOptions const &options) const
{
  if (lambda < 0.0) { throw std::invalid_argument("lambda must be non-negative"); }
  if (story.label < 0) { throw corpus::DataError("story " + story.id + " has no label"); }
  auto const f = forward(story, options, lambda > 0.0);
  Tensor loss = ad::cross_entropy(f.fused, story.label);
  if (f.lm_loss) { loss = loss + ad::scale(*f.lm_loss, lambda); }
  return loss;
}

Tensor StoryModel::total_loss(std::span<PreparedStory const> batch, double lambda,
                              narrative::ForwardOptions const &options) const
{
  if (batch.empty()) { throw std::invalid_argument("total_loss: empty batch"); }
  std::vector<Tensor> losses;
  losses.reserve(batch.size());
  for (auto const &s : batch) { losses.push_back(story_loss(s, lambda, options)); }
  return ad::sum(ad::concat_cols(losses));
}

ad::NamedParameters StoryModel::named_parameters() const
{
  ad::NamedParameters p = narrative_.named_parameters();
  append(p, sentiment_.named_parameters());
  append(p, knowledge_.named_parameters());
  append(p, gate_.named_parameters());
  return p;
}

ad::NamedParameters StoryModel::trainable_parameters() const
{
  ad::NamedParameters p;
  if (options_.mask[Channel::narrative]) { append(p, narrative_.named_parameters()); }
  if (options_.mask[Channel::sentiment]) { append(p, sentiment_.named_parameters()); }
  if (options_.mask[Channel::knowledge]) { append(p, knowledge_.named_parameters()); }
  append(p, gate_.named_parameters());
  return p;
}

io::Checkpoint StoryModel::to_checkpoint() const
{
  io::Checkpoint c;
  c.metadata = narrative_.config().to_metadata();
  c.metadata["model"] = "story";
  c.metadata["encoding"] = narrative::to_string(options_.encoding);
  c.metadata["gate.features"] = to_string(options_.features);
  c.metadata["ablation"] = options_.mask.to_string();
  c.metadata["lambda"] = format_double(options_.lambda);
  c.metadata["sentiment.hidden"] = std::to_string(sentiment_.hidden_size());
  c.vocabulary = resources_.vocabulary->regular_tokens();
  io::store_parameters(c, named_parameters());
  return c;
}

void StoryModel::save(std::filesystem::path const &path) const { io::write_checkpoint(path, to_checkpoint()); }

StoryModel StoryModel::load(std::filesystem::path const &path, Resources resources)
{
  auto const checkpoint = io::read_checkpoint(path);
  try {
    return from_checkpoint(checkpoint, std::move(resources));
  } catch (io::CheckpointError const &e) {
    throw io::CheckpointError(path.string() + ": " + e.what());
  }
}

StoryModel StoryModel::from_checkpoint(io::Checkpoint const &c, Resources resources)
{
  auto const it = c.metadata.find("model");
  if (it == c.metadata.end() || it->second != "story") { throw io::CheckpointError("not a story-model checkpoint"); }
  auto const config = narrative::TransformerConfig::from_metadata(c.metadata);
  resources.vocabulary = std::make_shared<corpus::Vocabulary const>(c.vocabulary);
  if (resources.vocabulary->size() != config.vocab_size) {
    throw io::CheckpointError("vocabulary size does not match the stored transformer config");
  }
  ModelOptions options;
  options.encoding = narrative::parse_encoding_mode(c.meta("encoding"));
  options.features = parse_gate_features(c.meta("gate.features"));
  options.mask = ChannelMask::parse(c.meta("ablation"));
  options.lambda = std::stod(c.meta("lambda"));
  std::mt19937_64 rng(0);
  narrative::TransformerLM lm(config, rng);
  sentiment::SentimentLstm lstm(rng, std::stoi(c.meta("sentiment.hidden")));
  knowledge::KnowledgeHead head(rng);
  CombinationGate gate(rng);
  StoryModel model(std::move(lm), std::move(lstm), std::move(head), std::move(gate), std::move(resources), options);
  io::load_parameters(c, model.named_parameters());
  return model;
}

} // namespace cloze::gate
