#include "cloze/sentiment/lstm.hpp"

#include <algorithm>

namespace cloze::sentiment {

using ad::Tensor;

namespace {

Tensor row_of(SentimentVector const &v)
{
  ad::Matrix m(1, 3);
  m << v.pos, v.neg, v.neu;
  return Tensor(std::move(m));
}

} // namespace

SentimentLstm::SentimentLstm(std::mt19937_64 &rng, int hidden)
  : hidden_(hidden)
{
  if (hidden < 1) { throw std::invalid_argument("sentiment LSTM hidden size must be positive"); }
  input_weight_ = ad::normal_parameter(3, 4 * hidden, rng);
  hidden_weight_ = ad::normal_parameter(hidden, 4 * hidden, rng);
  gate_bias_ = ad::zero_parameter(1, 4 * hidden);
  out_weight_ = ad::normal_parameter(hidden, 3, rng);
  out_bias_ = ad::zero_parameter(1, 3);
  similarity_ = ad::normal_parameter(3, 3, rng);
}

Tensor SentimentLstm::predict(std::span<SentimentVector const> body) const
{
  if (body.size() != 4) {
    throw std::invalid_argument("predict_sentiment: expected 4 body vectors, got " + std::to_string(body.size()));
  }
  auto const h = static_cast<ad::Index>(hidden_);
  Tensor state = Tensor::zeros(1, h);
  Tensor cell = Tensor::zeros(1, h);
  for (auto const &e : body) {
    Tensor const gates = ad::matmul(row_of(e), input_weight_) + ad::matmul(state, hidden_weight_) + gate_bias_;
    Tensor const input = ad::sigmoid(ad::slice_cols(gates, 0, h));
    Tensor const forget = ad::sigmoid(ad::slice_cols(gates, h, h));
    Tensor const candidate = ad::tanh(ad::slice_cols(gates, 2 * h, h));
    Tensor const output = ad::sigmoid(ad::slice_cols(gates, 3 * h, h));
    cell = ad::hadamard(forget, cell) + ad::hadamard(input, candidate);
    state = ad::hadamard(output, ad::tanh(cell));
  }
  return ad::softmax(ad::matmul(state, out_weight_) + out_bias_);
}

Tensor SentimentLstm::score(Tensor const &predicted, SentimentVector const &ending) const
{
  return ad::matmul(ad::matmul(predicted, similarity_), ad::transpose(row_of(ending)));
}

ad::NamedParameters SentimentLstm::predictor_parameters() const
{
  return {{"sentiment.input_weight", input_weight_},
          {"sentiment.hidden_weight", hidden_weight_},
          {"sentiment.gate_bias", gate_bias_},
          {"sentiment.out_weight", out_weight_},
          {"sentiment.out_bias", out_bias_}};
}

ad::NamedParameters SentimentLstm::named_parameters() const
{
  auto p = predictor_parameters();
  p.emplace_back("sentiment.similarity", similarity_);
  return p;
}

SentimentVector to_sentiment_vector(Tensor const &row)
{
  auto const &v = row.value();
  return {v(0, 0), v(0, 1), v(0, 2)};
}

StoryPolarity story_polarity(corpus::Story const &story, SentimentLexicon const &lexicon)
{
  StoryPolarity p;
  for (std::size_t i = 0; i < 4; ++i) { p.body[i] = sentence_polarity(story.body[i], lexicon); }
  for (auto const &e : story.endings) { p.endings.push_back(sentence_polarity(e, lexicon)); }
  return p;
}

double mean_similarity(SentimentLstm const &model, std::span<StoryPolarity const> stories)
{
  ad::NoGradGuard guard;
  if (stories.empty()) { return 0.0; }
  double total = 0.0;
  for (auto const &s : stories) {
    total += ad::cosine_similarity(model.predict(s.body), row_of(s.endings.at(0))).item();
  }
  return total / static_cast<double>(stories.size());
}

SentimentPretrainResult pretrain_sentiment(SentimentLstm &model, std::span<StoryPolarity const> stories,
                                           SentimentPretrainOptions const &options)
{
  if (options.batch_size < 1) { throw std::invalid_argument("pretrain_sentiment: batch_size must be positive"); }
  SentimentPretrainResult result;
  result.initial_similarity = mean_similarity(model, stories);
  if (options.epochs <= 0 || stories.empty()) { return result; }

  auto params = ad::tensors_of(model.predictor_parameters());
  ad::AdamState state(params, options.adam);
  auto rng = ad::substream(options.seed, "sentiment.shuffle");
  std::vector<std::size_t> order(stories.size());
  for (std::size_t i = 0; i < order.size(); ++i) { order[i] = i; }

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch_size)) {
      std::size_t const end = std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
      ad::zero_grad(params);
      std::vector<Tensor> sims;
      for (std::size_t i = start; i < end; ++i) {
        auto const &s = stories[order[i]];
        sims.push_back(ad::cosine_similarity(model.predict(s.body), row_of(s.endings.at(0))));
      }
      ad::backward(ad::scale(ad::mean(ad::concat_cols(sims)), -1.0));
      ad::clip_grad_norm(params, options.clip_norm);
      ad::adam_step(params, state);
    }
    state.options.learning_rate *= options.lr_decay;
    double const sim = mean_similarity(model, stories);
    result.epoch_similarities.push_back(sim);
    if (options.on_epoch) { options.on_epoch(epoch + 1, sim); }
  }
  return result;
}

} // namespace cloze::sentiment
