#pragma once

#include "cloze/narrative/transformer.hpp"

#include <array>
#include <optional>

namespace cloze::narrative {

enum class EncodingMode { fullstory, plotend };

EncodingMode parse_encoding_mode(std::string const &name);
std::string to_string(EncodingMode mode);

/// One candidate's pass through the narrative channel.
struct CandidateScore
{
  ad::Tensor logit;      // 1 x 1
  ad::Tensor clf_hidden; // 1 x dim, the ending's <clf> state
  ad::Tensor body_hidden; // 1 x dim summary of the body alone
  std::optional<ad::Tensor> lm_loss;
};

/// Hidden state at <clf> of the joint sequence feeds the linear head.
/// `body_hidden` is the state at <delim> (or the first position if the
/// window cut it off).
CandidateScore score_ending_fullstory(TransformerLM const &model, corpus::TokenSequence const &sequence,
                                      ForwardOptions const &options, bool with_lm_loss);
CandidateScore score_ending_fullstory(TransformerLM const &model, corpus::Story const &story, int ending_index,
                                      corpus::Vocabulary const &vocab);

/// Mean-pooled <clf> states of the four individually encoded body sentences.
struct PlotBody
{
  ad::Tensor vector; // 1 x dim
  std::optional<ad::Tensor> lm_loss;
};

PlotBody encode_plot_body(TransformerLM const &model, std::array<corpus::TokenSequence, 4> const &sentences,
                          ForwardOptions const &options, bool with_lm_loss);

/// logit = scale * cos(body vector, ending <clf> state) + bias.
CandidateScore score_ending_plotend(TransformerLM const &model, PlotBody const &body,
                                    corpus::TokenSequence const &ending, ForwardOptions const &options,
                                    bool with_lm_loss);
CandidateScore score_ending_plotend(TransformerLM const &model, corpus::Story const &story, int ending_index,
                                    corpus::Vocabulary const &vocab);

} // namespace cloze::narrative
