#include "cloze/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace cloze::harness {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s)
{
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) { return {}; }
  auto const e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T> T parse_number(std::string const &value)
{
  T out{};
  auto const *end = value.data() + value.size();
  auto const [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) { throw std::invalid_argument("'" + value + "' is not a valid number"); }
  return out;
}

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Binding
{
  std::function<void(RunConfig &, std::string const &, fs::path const &)> set;
  std::function<std::string(RunConfig const &)> get;
};

Binding path_key(fs::path RunConfig::*member)
{
  return {[member](RunConfig &c, std::string const &v, fs::path const &base) {
            fs::path p(v);
            c.*member = (v.empty() || p.is_absolute() || base.empty()) ? p : base / p;
          },
          [member](RunConfig const &c) { return (c.*member).string(); }};
}

template <typename T> Binding number_key(T RunConfig::*member)
{
  return {[member](RunConfig &c, std::string const &v, fs::path const &) { c.*member = parse_number<T>(v); },
          [member](RunConfig const &c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

template <typename T> Binding lm_key(T narrative::TransformerConfig::*member)
{
  return {[member](RunConfig &c, std::string const &v, fs::path const &) {
            c.transformer.*member = parse_number<T>(v);
          },
          [member](RunConfig const &c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.transformer.*member);
            } else {
              return std::to_string(c.transformer.*member);
            }
          }};
}

std::map<std::string, Binding> const &bindings()
{
  static std::map<std::string, Binding> const table = {
    {"data.train", path_key(&RunConfig::train_data)},
    {"data.test", path_key(&RunConfig::test_data)},
    {"data.unlabeled", path_key(&RunConfig::unlabeled_data)},
    {"embeddings", path_key(&RunConfig::embeddings)},
    {"lexicon", path_key(&RunConfig::lexicon)},
    {"boosters", path_key(&RunConfig::boosters)},
    {"negations", path_key(&RunConfig::negations)},
    {"stopwords", path_key(&RunConfig::stopwords)},
    {"checkpoint.lm", path_key(&RunConfig::lm_checkpoint)},
    {"checkpoint.sentiment", path_key(&RunConfig::sentiment_checkpoint)},
    {"checkpoint.model", path_key(&RunConfig::model_checkpoint)},
    {"lm.layers", lm_key(&narrative::TransformerConfig::layers)},
    {"lm.heads", lm_key(&narrative::TransformerConfig::heads)},
    {"lm.model_dim", lm_key(&narrative::TransformerConfig::model_dim)},
    {"lm.window", lm_key(&narrative::TransformerConfig::window)},
    {"lm.dropout", lm_key(&narrative::TransformerConfig::dropout)},
    {"vocab.min_count", number_key(&RunConfig::min_count)},
    {"train.learning_rate", number_key(&RunConfig::learning_rate)},
    {"train.lr_decay", number_key(&RunConfig::lr_decay)},
    {"train.batch_size", number_key(&RunConfig::batch_size)},
    {"train.epochs", number_key(&RunConfig::epochs)},
    {"train.clip_norm", number_key(&RunConfig::clip_norm)},
    {"train.fraction", number_key(&RunConfig::train_fraction)},
    {"train.gate_warmup", number_key(&RunConfig::gate_warmup)},
    {"lambda", number_key(&RunConfig::lambda)},
    {"encoding",
     {[](RunConfig &c, std::string const &v, fs::path const &) { c.encoding = narrative::parse_encoding_mode(v); },
      [](RunConfig const &c) { return narrative::to_string(c.encoding); }}},
    {"gate.features",
     {[](RunConfig &c, std::string const &v, fs::path const &) { c.gate_features = gate::parse_gate_features(v); },
      [](RunConfig const &c) { return gate::to_string(c.gate_features); }}},
    {"ablation",
     {[](RunConfig &c, std::string const &v, fs::path const &) { c.mask = gate::ChannelMask::parse(v); },
      [](RunConfig const &c) { return c.mask ? c.mask->to_string() : std::string("all"); }}},
    {"pretrain.lm.epochs", number_key(&RunConfig::lm_epochs)},
    {"pretrain.lm.learning_rate", number_key(&RunConfig::lm_learning_rate)},
    {"pretrain.lm.lr_decay", number_key(&RunConfig::lm_lr_decay)},
    {"pretrain.sentiment.epochs", number_key(&RunConfig::sentiment_epochs)},
    {"pretrain.sentiment.learning_rate", number_key(&RunConfig::sentiment_learning_rate)},
    {"ablate.retrain_epochs", number_key(&RunConfig::retrain_epochs)},
    {"seed", number_key(&RunConfig::seed)},
  };
  return table;
}

} // namespace

void RunConfig::validate() const
{
  auto require = [](bool ok, std::string const &what) {
    if (!ok) { throw ConfigError(what); }
  };
  require(learning_rate > 0.0, "train.learning_rate must be positive");
  require(lm_learning_rate > 0.0, "pretrain.lm.learning_rate must be positive");
  require(sentiment_learning_rate > 0.0, "pretrain.sentiment.learning_rate must be positive");
  require(lr_decay > 0.0 && lm_lr_decay > 0.0, "learning-rate decay must be positive");
  require(batch_size > 0, "train.batch_size must be positive");
  require(epochs >= 0 && lm_epochs >= 0 && sentiment_epochs >= 0 && retrain_epochs >= 0 && gate_warmup >= 0,
          "epoch counts must be non-negative");
  require(clip_norm > 0.0, "train.clip_norm must be positive");
  require(train_fraction > 0.0 && train_fraction <= 1.0, "train.fraction must be in (0, 1]");
  require(lambda >= 0.0, "lambda must be non-negative");
  require(min_count >= 1, "vocab.min_count must be at least 1");
  auto lm = transformer;
  lm.vocab_size = corpus::kReservedTokens;
  try {
    lm.validate();
  } catch (std::exception const &e) {
    throw ConfigError(e.what());
  }
}

gate::ModelOptions RunConfig::model_options() const
{
  gate::ModelOptions o;
  o.encoding = encoding;
  o.features = gate_features;
  o.mask = mask.value_or(gate::ChannelMask{});
  o.lambda = lambda;
  return o;
}

std::map<std::string, std::string> RunConfig::to_map() const
{
  std::map<std::string, std::string> out;
  for (auto const &[key, binding] : bindings()) { out[key] = binding.get(*this); }
  return out;
}

RunConfig parse_config(std::string_view text, fs::path const &base_dir, RunConfig config)
{
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto const hash = raw.find('#');
    std::string const content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) { continue; }
    auto const eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line) + ": expected 'key = value', got '" + content + "'");
    }
    std::string const key = trim(content.substr(0, eq));
    std::string const value = trim(content.substr(eq + 1));
    auto const it = bindings().find(key);
    if (it == bindings().end()) {
      throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    try {
      it->second.set(config, value, base_dir);
    } catch (ConfigError const &) {
      throw;
    } catch (std::exception const &e) {
      throw ConfigError("config line " + std::to_string(line) + " (" + key + "): " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(fs::path const &path, RunConfig config)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw ConfigError("cannot open config file " + path.string()); }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), path.parent_path(), std::move(config));
  } catch (ConfigError const &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace cloze::harness
