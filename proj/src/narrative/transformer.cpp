#include "cloze/narrative/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cloze::narrative {

using ad::Tensor;

void TransformerConfig::validate() const
{
  auto fail = [](std::string const &what) { throw std::invalid_argument("transformer config: " + what); };
  if (layers < 1) { fail("layers must be positive"); }
  if (heads < 1) { fail("heads must be positive"); }
  if (model_dim < 1 || model_dim % heads != 0) { fail("model_dim must be a positive multiple of heads"); }
  if (window < 2) { fail("window must be at least 2"); }
  if (vocab_size < 1) { fail("vocab_size must be positive"); }
  if (!(dropout >= 0.0 && dropout < 1.0)) { fail("dropout must lie in [0, 1)"); }
}

std::map<std::string, std::string> TransformerConfig::to_metadata() const
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", dropout);
  return {{"lm.layers", std::to_string(layers)},         {"lm.heads", std::to_string(heads)},
          {"lm.model_dim", std::to_string(model_dim)},   {"lm.window", std::to_string(window)},
          {"lm.vocab_size", std::to_string(vocab_size)}, {"lm.dropout", buf}};
}

TransformerConfig TransformerConfig::from_metadata(std::map<std::string, std::string> const &meta)
{
  auto get = [&](std::string const &k) -> std::string const & {
    auto it = meta.find(k);
    if (it == meta.end()) { throw std::invalid_argument("checkpoint metadata lacks '" + k + "'"); }
    return it->second;
  };
  TransformerConfig c;
  c.layers = std::stoi(get("lm.layers"));
  c.heads = std::stoi(get("lm.heads"));
  c.model_dim = std::stoi(get("lm.model_dim"));
  c.window = std::stoi(get("lm.window"));
  c.vocab_size = std::stoi(get("lm.vocab_size"));
  c.dropout = std::stod(get("lm.dropout"));
  c.validate();
  return c;
}

TransformerLM::TransformerLM(TransformerConfig const &config, std::mt19937_64 &rng)
  : config_(config)
{
  config_.validate();
  auto const d = config_.model_dim;
  token_embedding_ = ad::normal_parameter(config_.vocab_size, d, rng);
  position_embedding_ = ad::normal_parameter(config_.window, d, rng);
  for (int l = 0; l < config_.layers; ++l) {
    Block b;
    b.ln1_gain = ad::constant_parameter(1, d, 1.0);
    b.ln1_bias = ad::zero_parameter(1, d);
    b.qkv_weight = ad::normal_parameter(d, 3 * d, rng);
    b.qkv_bias = ad::zero_parameter(1, 3 * d);
    b.out_weight = ad::normal_parameter(d, d, rng);
    b.out_bias = ad::zero_parameter(1, d);
    b.ln2_gain = ad::constant_parameter(1, d, 1.0);
    b.ln2_bias = ad::zero_parameter(1, d);
    b.fc_weight = ad::normal_parameter(d, 4 * d, rng);
    b.fc_bias = ad::zero_parameter(1, 4 * d);
    b.proj_weight = ad::normal_parameter(4 * d, d, rng);
    b.proj_bias = ad::zero_parameter(1, d);
    blocks_.push_back(std::move(b));
  }
  final_gain_ = ad::constant_parameter(1, d, 1.0);
  final_bias_ = ad::zero_parameter(1, d);
  head_weight_ = ad::normal_parameter(d, 1, rng);
  head_bias_ = ad::zero_parameter(1, 1);
  plot_scale_ = ad::constant_parameter(1, 1, 1.0);
  plot_bias_ = ad::zero_parameter(1, 1);

  ad::Matrix mask = ad::Matrix::Zero(config_.window, config_.window);
  for (ad::Index r = 0; r < mask.rows(); ++r) {
    for (ad::Index c = r + 1; c < mask.cols(); ++c) { mask(r, c) = -std::numeric_limits<double>::infinity(); }
  }
  causal_mask_ = Tensor(std::move(mask));
}

Tensor TransformerLM::attention(Block const &b, Tensor const &x, ForwardOptions const &options) const
{
  auto const t = x.rows();
  auto const d = static_cast<ad::Index>(config_.model_dim);
  auto const dh = d / config_.heads;
  double const rate = options.dropout_rng ? config_.dropout : 0.0;
  Tensor const qkv = ad::matmul(x, b.qkv_weight) + b.qkv_bias;
  Tensor const mask(causal_mask_.value().topLeftCorner(t, t));
  double const inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> heads;
  heads.reserve(static_cast<std::size_t>(config_.heads));
  for (int h = 0; h < config_.heads; ++h) {
    Tensor const q = ad::slice_cols(qkv, h * dh, dh);
    Tensor const k = ad::slice_cols(qkv, d + h * dh, dh);
    Tensor const v = ad::slice_cols(qkv, 2 * d + h * dh, dh);
    Tensor scores = ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt) + mask;
    Tensor weights = ad::dropout(ad::softmax(scores), rate, options.dropout_rng);
    heads.push_back(ad::matmul(weights, v));
  }
  Tensor const merged = heads.size() == 1 ? heads.front() : ad::concat_cols(heads);
  return ad::dropout(ad::matmul(merged, b.out_weight) + b.out_bias, rate, options.dropout_rng);
}

LmOutput TransformerLM::forward(std::span<int const> ids, ForwardOptions const &options) const
{
  if (ids.empty()) { throw ad::ContractError("transformer: empty sequence"); }
  if (static_cast<int>(ids.size()) > config_.window) {
    throw ad::ContractError("transformer: sequence of " + std::to_string(ids.size()) + " tokens exceeds window " +
                            std::to_string(config_.window));
  }
  auto const t = static_cast<ad::Index>(ids.size());
  double const rate = options.dropout_rng ? config_.dropout : 0.0;
  Tensor h = ad::gather_rows(token_embedding_, ids) + ad::slice_rows(position_embedding_, 0, t);
  h = ad::dropout(h, rate, options.dropout_rng);
  for (auto const &b : blocks_) {
    h = h + attention(b, ad::layer_norm(h, b.ln1_gain, b.ln1_bias), options);
    Tensor const inner = ad::gelu(ad::matmul(ad::layer_norm(h, b.ln2_gain, b.ln2_bias), b.fc_weight) + b.fc_bias);
    h = h + ad::dropout(ad::matmul(inner, b.proj_weight) + b.proj_bias, rate, options.dropout_rng);
  }
  LmOutput out{std::nullopt, ad::layer_norm(h, final_gain_, final_bias_)};
  if (options.with_logits) { out.logits = ad::matmul(out.hidden, ad::transpose(token_embedding_)); }
  return out;
}

TransformerLM::Distributions TransformerLM::lm_forward(corpus::TokenSequence const &seq) const
{
  ad::NoGradGuard guard;
  auto out = forward(seq.ids);
  return {ad::softmax(*out.logits).value(), out.hidden.value()};
}

Tensor TransformerLM::lm_loss(LmOutput const &out, std::span<int const> ids)
{
  if (ids.size() < 2) { throw ad::ContractError("lm_loss: need at least 2 tokens"); }
  if (!out.logits) { throw ad::ContractError("lm_loss: forward pass ran without logits"); }
  auto const n = static_cast<ad::Index>(ids.size());
  return ad::cross_entropy_with_logits(ad::slice_rows(*out.logits, 0, n - 1), ids.subspan(1));
}

Tensor TransformerLM::lm_loss(corpus::TokenSequence const &seq, ForwardOptions const &options) const
{
  if (seq.size() < 2) { throw ad::ContractError("lm_loss: need at least 2 tokens"); }
  ForwardOptions opts = options;
  opts.with_logits = true;
  return lm_loss(forward(seq.ids, opts), seq.ids);
}

Tensor TransformerLM::classify(Tensor const &clf_hidden) const
{
  return ad::matmul(clf_hidden, head_weight_) + head_bias_;
}

Tensor TransformerLM::plot_end_logit(Tensor const &body, Tensor const &ending) const
{
  return ad::hadamard(ad::cosine_similarity(body, ending), plot_scale_) + plot_bias_;
}

ad::NamedParameters TransformerLM::lm_parameters() const
{
  ad::NamedParameters p{{"lm.token_embedding", token_embedding_}, {"lm.position_embedding", position_embedding_}};
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    auto const &b = blocks_[l];
    auto const prefix = "lm.block" + std::to_string(l) + ".";
    p.emplace_back(prefix + "ln1_gain", b.ln1_gain);
    p.emplace_back(prefix + "ln1_bias", b.ln1_bias);
    p.emplace_back(prefix + "qkv_weight", b.qkv_weight);
    p.emplace_back(prefix + "qkv_bias", b.qkv_bias);
    p.emplace_back(prefix + "out_weight", b.out_weight);
    p.emplace_back(prefix + "out_bias", b.out_bias);
    p.emplace_back(prefix + "ln2_gain", b.ln2_gain);
    p.emplace_back(prefix + "ln2_bias", b.ln2_bias);
    p.emplace_back(prefix + "fc_weight", b.fc_weight);
    p.emplace_back(prefix + "fc_bias", b.fc_bias);
    p.emplace_back(prefix + "proj_weight", b.proj_weight);
    p.emplace_back(prefix + "proj_bias", b.proj_bias);
  }
  p.emplace_back("lm.final_gain", final_gain_);
  p.emplace_back("lm.final_bias", final_bias_);
  return p;
}

ad::NamedParameters TransformerLM::named_parameters() const
{
  auto p = lm_parameters();
  p.emplace_back("narrative.head_weight", head_weight_);
  p.emplace_back("narrative.head_bias", head_bias_);
  p.emplace_back("narrative.plot_scale", plot_scale_);
  p.emplace_back("narrative.plot_bias", plot_bias_);
  return p;
}

double corpus_lm_loss(TransformerLM const &model, std::span<corpus::TokenSequence const> corpus)
{
  ad::NoGradGuard guard;
  double total = 0.0;
  std::size_t n = 0;
  for (auto const &seq : corpus) {
    if (seq.size() < 2) { continue; }
    total += model.lm_loss(seq).item();
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

PretrainResult pretrain_lm(TransformerLM &model, std::span<corpus::TokenSequence const> corpus,
                           PretrainOptions const &options)
{
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].size() >= 2) { usable.push_back(i); }
  }
  if (usable.empty()) { throw std::invalid_argument("pretrain_lm: corpus has no sequence of 2+ tokens"); }
  if (options.batch_size < 1) { throw std::invalid_argument("pretrain_lm: batch_size must be positive"); }

  PretrainResult result;
  result.initial_loss = corpus_lm_loss(model, corpus);
  if (options.epochs <= 0) { return result; }

  auto params = ad::tensors_of(model.lm_parameters());
  ad::AdamState state(params, options.adam);
  auto shuffle_rng = ad::substream(options.seed, "lm.shuffle");
  auto dropout_rng = ad::substream(options.seed, "lm.dropout");
  ForwardOptions fwd{&dropout_rng, true};

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(usable.begin(), usable.end(), shuffle_rng);
    for (std::size_t start = 0; start < usable.size(); start += static_cast<std::size_t>(options.batch_size)) {
      std::size_t const end = std::min(usable.size(), start + static_cast<std::size_t>(options.batch_size));
      ad::zero_grad(params);
      double const inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        ad::backward(ad::scale(model.lm_loss(corpus[usable[i]], fwd), inv));
      }
      ad::clip_grad_norm(params, options.clip_norm);
      ad::adam_step(params, state);
    }
    state.options.learning_rate *= options.lr_decay;
    double const loss = corpus_lm_loss(model, corpus);
    result.epoch_losses.push_back(loss);
    if (options.on_epoch) { options.on_epoch(epoch + 1, loss); }
    if (options.target_loss && loss < *options.target_loss) { break; }
  }
  return result;
}

} // namespace cloze::narrative
