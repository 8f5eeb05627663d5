#include "cloze/harness/synth.hpp"
#include "cloze/sentiment/lstm.hpp"
#include "support/gradcheck.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <cmath>

using namespace cloze;
using sentiment::SentimentVector;

namespace {

sentiment::SentimentLexicon tiny_lexicon()
{
  sentiment::SentimentLexicon lex;
  lex.set_valence("good", 3.0);
  lex.set_valence("bad", -2.0);
  lex.set_booster("very", 0.293);
  lex.add_negation("not");
  return lex;
}

void check_simplex(SentimentVector const &v)
{
  CHECK(v.pos >= 0.0);
  CHECK(v.neg >= 0.0);
  CHECK(v.neu >= 0.0);
  CHECK(std::abs(v.pos + v.neg + v.neu - 1.0) <= 1e-9);
}

SentimentVector random_simplex(std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng), c = u(rng);
  double const s = a + b + c;
  return {a / s, b / s, c / s};
}

// Plain-Eigen LSTM with the documented gate order i, f, g, o, written apart
// from the autodiff version.
Eigen::RowVector3d reference_predict(sentiment::SentimentLstm const &m, std::array<SentimentVector, 4> const &body)
{
  auto const p = m.named_parameters();
  auto value = [&](std::string const &name) -> ad::Matrix const & {
    for (auto const &[n, t] : p) {
      if (n == name) { return t.value(); }
    }
    throw std::runtime_error("no " + name);
  };
  auto const &wx = value("sentiment.input_weight");
  auto const &wh = value("sentiment.hidden_weight");
  auto const &bias = value("sentiment.gate_bias");
  auto const &wo = value("sentiment.out_weight");
  auto const &bo = value("sentiment.out_bias");
  int const h = m.hidden_size();
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  Eigen::RowVectorXd state = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd cell = Eigen::RowVectorXd::Zero(h);
  for (auto const &e : body) {
    Eigen::RowVectorXd const z = e.as_row() * wx + state * wh + bias;
    for (int j = 0; j < h; ++j) {
      double const i = sigmoid(z(j));
      double const f = sigmoid(z(h + j));
      double const g = std::tanh(z(2 * h + j));
      double const o = sigmoid(z(3 * h + j));
      cell(j) = f * cell(j) + i * g;
      state(j) = o * std::tanh(cell(j));
    }
  }
  Eigen::RowVector3d logits = state * wo + bo;
  logits = (logits.array() - logits.maxCoeff()).exp();
  return logits / logits.sum();
}

std::vector<sentiment::StoryPolarity> polarities(std::vector<corpus::Story> const &stories,
                                                 sentiment::SentimentLexicon const &lex)
{
  std::vector<sentiment::StoryPolarity> out;
  for (auto const &s : stories) { out.push_back(sentiment::story_polarity(s, lex)); }
  return out;
}

sentiment::SentimentLexicon synth_lexicon(harness::SyntheticData const &data)
{
  sentiment::SentimentLexicon lex;
  for (auto const &[w, v] : data.lexicon) { lex.set_valence(w, v); }
  lex.add_negation("not");
  return lex;
}

} // namespace

TEST_CASE("sentence polarity, hand traces")
{
  auto const lex = tiny_lexicon();
  CHECK(sentiment::sentence_polarity("", lex) == SentimentVector{0.0, 0.0, 1.0});
  CHECK(sentiment::sentence_polarity("...!", lex) == SentimentVector{0.0, 0.0, 1.0});
  CHECK(sentiment::sentence_polarity("good", lex) == SentimentVector{1.0, 0.0, 0.0});

  auto const not_good = sentiment::sentence_polarity("not good", lex);
  CHECK(not_good.pos == 0.0);
  CHECK(not_good.neg > 0.0);
  // good: 3 * -0.74 = -2.22, so neg = 3.22 and "not" is one neutral word.
  CHECK(not_good.neg == doctest::Approx(3.22 / 4.22).epsilon(1e-12));
  CHECK(not_good.neu == doctest::Approx(1.0 / 4.22).epsilon(1e-12));

  // Booster adds with the valence's sign: 3.293 + 1 and -2.293 - 1.
  auto const very_good = sentiment::sentence_polarity("Very good.", lex);
  CHECK(very_good.pos == doctest::Approx(4.293 / 5.293).epsilon(1e-12));
  auto const very_bad = sentiment::sentence_polarity("very bad", lex);
  CHECK(very_bad.neg == doctest::Approx(3.293 / 4.293).epsilon(1e-12));

  // Negation reaches back three words, not four.
  CHECK(sentiment::sentence_polarity("not a b good", lex).neg > 0.0);
  CHECK(sentiment::sentence_polarity("not a b c good", lex).neg == 0.0);

  // good + bad: pos 4, neg 3, one neutral word.
  auto const mixed = sentiment::sentence_polarity("good and bad", lex);
  CHECK(mixed.pos == doctest::Approx(4.0 / 8.0));
  CHECK(mixed.neg == doctest::Approx(3.0 / 8.0));
  CHECK(mixed.neu == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("sentence polarity properties on the bundled lexicon")
{
  auto const lex = sentiment::SentimentLexicon::bundled();
  CHECK(lex.size() > 100);
  CHECK(lex.is_negation("not"));
  CHECK(lex.valence("happy") > 0.0);
  CHECK(lex.valence("sad") < 0.0);
  std::vector<std::string> const words = {"happy", "sad",   "not",   "very", "the",  "dog", "never", "good",
                                          "awful", "great", "hate", "love", "kind", "was", "!",     ","};
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string s;
    int const n = std::uniform_int_distribution<int>(0, 10)(rng);
    for (int i = 0; i < n; ++i) { s += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)] + " "; }
    auto const v = sentiment::sentence_polarity(s, lex);
    check_simplex(v);
    CHECK(sentiment::sentence_polarity(s, lex) == v);
  }
}

TEST_CASE("lexicon files")
{
  testing::TempDir dir;
  auto const lex = dir.write("lex.tsv", "# comment\ngood\t3\r\nbad\t-2.5\n");
  auto const boost = dir.write("b.tsv", "very\t0.3\n");
  auto const neg = dir.write("n.txt", "not\nnever\n");
  auto const l = sentiment::SentimentLexicon::load(lex, boost, neg);
  CHECK(l.valence("good") == 3.0);
  CHECK(l.valence("bad") == -2.5);
  CHECK(l.booster("very") == 0.3);
  CHECK(l.is_negation("never"));
  CHECK(l.size() == 2);

  CHECK_THROWS_AS(sentiment::SentimentLexicon::load(dir.write("x.tsv", "good 3\n"), boost, neg), corpus::DataError);
  CHECK_THROWS_AS(sentiment::SentimentLexicon::load(dir.write("y.tsv", "good\t5\n"), boost, neg), corpus::DataError);
  CHECK_THROWS_AS(sentiment::SentimentLexicon::load(lex, dir.write("z.tsv", "very\t2\n"), neg), corpus::DataError);
  CHECK_THROWS_AS(sentiment::SentimentLexicon::load(dir / "missing", boost, neg), corpus::DataError);
}

TEST_CASE("sentiment LSTM")
{
  std::mt19937_64 init(3);
  sentiment::SentimentLstm lstm(init);
  CHECK(lstm.hidden_size() == 64);
  std::mt19937_64 rng(4);
  for (auto &[name, p] : lstm.named_parameters()) {
    p.mutable_value() = ad::Matrix::Random(p.rows(), p.cols());
  }

  SUBCASE("matches a plain LSTM and stays on the simplex")
  {
    for (int trial = 0; trial < 50; ++trial) {
      std::array<SentimentVector, 4> body;
      for (auto &b : body) { b = random_simplex(rng); }
      auto const p = lstm.predict(body);
      check_simplex(sentiment::to_sentiment_vector(p));
      CHECK((p.value() - reference_predict(lstm, body)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(lstm.predict(body).value() == p.value());
    }
  }
  SUBCASE("needs exactly four vectors")
  {
    std::vector<SentimentVector> three(3);
    std::vector<SentimentVector> five(5);
    CHECK_THROWS_AS(lstm.predict(three), std::invalid_argument);
    CHECK_THROWS_AS(lstm.predict(five), std::invalid_argument);
  }
  SUBCASE("bilinear score")
  {
    ad::Tensor ws = lstm.similarity();
    ws.mutable_value() = ad::Matrix::Identity(3, 3);
    auto const ep = ad::Tensor::row({1.0, 0.0, 0.0});
    CHECK(lstm.score(ep, {1.0, 0.0, 0.0}).item() > lstm.score(ep, {0.0, 1.0, 0.0}).item());
    ws.mutable_value() = ad::Matrix::Random(3, 3);
    auto const e = random_simplex(rng);
    auto const pr = random_simplex(rng);
    double const expected = pr.as_row() * ws.value() * e.as_row().transpose();
    CHECK(lstm.score(ad::Tensor(ad::Matrix(pr.as_row())), e).item() == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("pretraining loss gradient")
  {
    for (int trial = 0; trial < 3; ++trial) {
      std::array<SentimentVector, 4> body;
      for (auto &b : body) { b = random_simplex(rng); }
      ad::Tensor const target(ad::Matrix(random_simplex(rng).as_row()));
      auto const loss = [&] { return ad::scale(ad::cosine_similarity(lstm.predict(body), target), -1.0); };
      CHECK(testing::max_gradient_error(loss, ad::tensors_of(lstm.predictor_parameters())) < 1e-4);
    }
  }
}

TEST_CASE("sentiment pretraining")
{
  auto const data = harness::generate_synthetic({harness::SynthKind::sentiment, 200, 100, 5});
  auto const lex = synth_lexicon(data);
  auto const train = polarities(data.unlabeled, lex);

  // Held-out stories with the gold ending moved to slot 0.
  auto test_stories = data.test;
  for (auto &s : test_stories) {
    s.endings = {s.endings[static_cast<std::size_t>(*s.label)]};
    s.label.reset();
  }
  auto const test = polarities(test_stories, lex);

  sentiment::SentimentPretrainOptions options;
  options.seed = 6;

  SUBCASE("zero epochs leaves parameters alone")
  {
    std::mt19937_64 a(7), b(7);
    sentiment::SentimentLstm lstm(a), fresh(b);
    options.epochs = 0;
    auto const r = sentiment::pretrain_sentiment(lstm, train, options);
    CHECK(r.epoch_similarities.empty());
    auto const x = lstm.named_parameters();
    auto const y = fresh.named_parameters();
    for (std::size_t i = 0; i < x.size(); ++i) { CHECK(x[i].second.value() == y[i].second.value()); }
  }
  SUBCASE("one epoch raises the mean similarity")
  {
    std::mt19937_64 a(7), b(7);
    sentiment::SentimentLstm lstm(a);
    sentiment::SentimentLstm const fresh(b);
    auto const first100 = std::span(train).first(100);
    auto const r = sentiment::pretrain_sentiment(lstm, first100, options);
    REQUIRE(r.epoch_similarities.size() == 1);
    CHECK(r.epoch_similarities[0] > r.initial_similarity);
    CHECK(r.initial_similarity == sentiment::mean_similarity(fresh, first100));
  }
  SUBCASE("held-out similarity after pretraining")
  {
    std::mt19937_64 a(7);
    sentiment::SentimentLstm lstm(a);
    options.epochs = 15;
    options.adam.learning_rate = 1e-2;
    sentiment::pretrain_sentiment(lstm, train, options);
    double const held_out = sentiment::mean_similarity(lstm, test);
    INFO("held-out mean cosine " << held_out);
    CHECK(held_out > 0.9);
  }
}
