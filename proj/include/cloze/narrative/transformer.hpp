#pragma once

#include "cloze/autodiff/adam.hpp"
#include "cloze/autodiff/ops.hpp"
#include "cloze/autodiff/parameters.hpp"
#include "cloze/corpus/encode.hpp"

#include <functional>
#include <map>
#include <random>
#include <span>

namespace cloze::narrative {

struct TransformerConfig
{
  int layers = 2;
  int heads = 4;
  int model_dim = 128;
  int window = 128;
  int vocab_size = 0;
  double dropout = 0.1;

  void validate() const;
  std::map<std::string, std::string> to_metadata() const;
  static TransformerConfig from_metadata(std::map<std::string, std::string> const &meta);
  bool operator==(TransformerConfig const &) const = default;
};

/// Training-time switches for one forward pass. A null rng means evaluation
/// (no dropout).
struct ForwardOptions
{
  std::mt19937_64 *dropout_rng = nullptr;
  bool with_logits = true;
};

struct LmOutput
{
  // [T x vocab] next-token logits, tied to the token embedding. Empty when
  // the forward pass skipped them.
  std::optional<ad::Tensor> logits;
  // [T x dim] final-layer hidden states after the closing layer norm.
  ad::Tensor hidden;
};

/// Pre-norm causal transformer decoder with tied input/output embeddings and
/// an ending-classification head.
class TransformerLM
{
public:
  TransformerLM(TransformerConfig const &config, std::mt19937_64 &init_rng);

  LmOutput forward(std::span<int const> ids, ForwardOptions const &options = {}) const;

  /// Next-token distributions (softmax of the logits) and hidden states.
  struct Distributions
  {
    ad::Matrix probabilities;
    ad::Matrix hidden;
  };
  Distributions lm_forward(corpus::TokenSequence const &seq) const;

  /// Mean negative log-likelihood of tokens 2..n given their prefixes.
  ad::Tensor lm_loss(corpus::TokenSequence const &seq, ForwardOptions const &options = {}) const;
  static ad::Tensor lm_loss(LmOutput const &out, std::span<int const> ids);

  /// W_M h + b_M for one hidden row.
  ad::Tensor classify(ad::Tensor const &clf_hidden) const;
  /// scale * cos(body, ending) + bias.
  ad::Tensor plot_end_logit(ad::Tensor const &body, ad::Tensor const &ending) const;

  ad::NamedParameters named_parameters() const;
  /// Parameters of the language model proper, without the task heads.
  ad::NamedParameters lm_parameters() const;
  TransformerConfig const &config() const { return config_; }
  ad::Tensor const &token_embedding() const { return token_embedding_; }

private:
  struct Block
  {
    ad::Tensor ln1_gain, ln1_bias;
    ad::Tensor qkv_weight, qkv_bias;
    ad::Tensor out_weight, out_bias;
    ad::Tensor ln2_gain, ln2_bias;
    ad::Tensor fc_weight, fc_bias;
    ad::Tensor proj_weight, proj_bias;
  };

  ad::Tensor attention(Block const &b, ad::Tensor const &x, ForwardOptions const &options) const;

  TransformerConfig config_;
  ad::Tensor token_embedding_;
  ad::Tensor position_embedding_;
  std::vector<Block> blocks_;
  ad::Tensor final_gain_, final_bias_;
  ad::Tensor head_weight_, head_bias_;
  ad::Tensor plot_scale_, plot_bias_;
  ad::Tensor causal_mask_;
};

struct PretrainOptions
{
  int epochs = 1;
  int batch_size = 8;
  ad::AdamOptions adam{};
  double lr_decay = 1.0;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  // Stop after the first epoch whose corpus loss falls below this.
  std::optional<double> target_loss;
  std::function<void(int epoch, double loss)> on_epoch;
};

struct PretrainResult
{
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;
};

/// Mean lm_loss over the sequences of length >= 2, without dropout.
double corpus_lm_loss(TransformerLM const &model, std::span<corpus::TokenSequence const> corpus);

/// Desk-scale language-model pretraining with Adam over shuffled minibatches.
/// Each epoch's reported loss is the evaluated corpus loss after the epoch.
PretrainResult pretrain_lm(TransformerLM &model, std::span<corpus::TokenSequence const> corpus,
                           PretrainOptions const &options);

} // namespace cloze::narrative
