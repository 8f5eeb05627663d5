#include "cloze/narrative/scoring.hpp"

#include <algorithm>

namespace cloze::narrative {

EncodingMode parse_encoding_mode(std::string const &name)
{
  if (name == "fullstory") { return EncodingMode::fullstory; }
  if (name == "plotend") { return EncodingMode::plotend; }
  throw std::invalid_argument("unknown encoding mode '" + name + "' (expected fullstory or plotend)");
}

std::string to_string(EncodingMode mode) { return mode == EncodingMode::fullstory ? "fullstory" : "plotend"; }

namespace {

ad::Tensor last_row(ad::Tensor const &hidden) { return ad::slice_rows(hidden, hidden.rows() - 1, 1); }

} // namespace

CandidateScore score_ending_fullstory(TransformerLM const &model, corpus::TokenSequence const &sequence,
                                      ForwardOptions const &options, bool with_lm_loss)
{
  ForwardOptions opts = options;
  opts.with_logits = with_lm_loss;
  auto const out = model.forward(sequence.ids, opts);
  auto const delim = std::find(sequence.ids.begin(), sequence.ids.end(), corpus::kDelim);
  auto const body_at = delim == sequence.ids.end() ? 0 : static_cast<ad::Index>(delim - sequence.ids.begin());
  CandidateScore s{model.classify(last_row(out.hidden)), last_row(out.hidden), ad::slice_rows(out.hidden, body_at, 1),
                   std::nullopt};
  if (with_lm_loss && sequence.size() >= 2) { s.lm_loss = TransformerLM::lm_loss(out, sequence.ids); }
  return s;
}

CandidateScore score_ending_fullstory(TransformerLM const &model, corpus::Story const &story, int ending_index,
                                      corpus::Vocabulary const &vocab)
{
  auto const seq = corpus::encode_full_story(story, ending_index, vocab, model.config().window);
  return score_ending_fullstory(model, seq, {}, false);
}

PlotBody encode_plot_body(TransformerLM const &model, std::array<corpus::TokenSequence, 4> const &sentences,
                          ForwardOptions const &options, bool with_lm_loss)
{
  ForwardOptions opts = options;
  opts.with_logits = with_lm_loss;
  std::vector<ad::Tensor> states;
  std::vector<ad::Tensor> losses;
  for (auto const &seq : sentences) {
    auto const out = model.forward(seq.ids, opts);
    states.push_back(last_row(out.hidden));
    if (with_lm_loss) { losses.push_back(TransformerLM::lm_loss(out, seq.ids)); }
  }
  PlotBody body{ad::mean_rows(ad::concat_rows(states)), std::nullopt};
  if (with_lm_loss) { body.lm_loss = ad::mean(ad::concat_cols(losses)); }
  return body;
}

CandidateScore score_ending_plotend(TransformerLM const &model, PlotBody const &body,
                                    corpus::TokenSequence const &ending, ForwardOptions const &options,
                                    bool with_lm_loss)
{
  ForwardOptions opts = options;
  opts.with_logits = with_lm_loss;
  auto const out = model.forward(ending.ids, opts);
  auto const clf = last_row(out.hidden);
  CandidateScore s{model.plot_end_logit(body.vector, clf), clf, body.vector, std::nullopt};
  if (with_lm_loss && ending.size() >= 2) { s.lm_loss = TransformerLM::lm_loss(out, ending.ids); }
  return s;
}

CandidateScore score_ending_plotend(TransformerLM const &model, corpus::Story const &story, int ending_index,
                                    corpus::Vocabulary const &vocab)
{
  auto const window = model.config().window;
  std::array<corpus::TokenSequence, 4> sentences;
  for (std::size_t i = 0; i < 4; ++i) { sentences[i] = corpus::encode_sentence(story.body[i], vocab, window); }
  auto const body = encode_plot_body(model, sentences, {}, false);
  auto const [plot, ending] = corpus::encode_plot_end(story, ending_index, vocab, window);
  return score_ending_plotend(model, body, ending, {}, false);
}

} // namespace cloze::narrative
