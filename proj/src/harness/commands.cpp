#include "cloze/harness/commands.hpp"

#include "cloze/corpus/tokenizer.hpp"
#include "cloze/io/data_dir.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cloze::harness {

namespace fs = std::filesystem;
using gate::Channel;
using gate::ChannelMask;
using gate::PreparedStory;
using gate::StoryModel;

namespace {

fs::path or_default(fs::path const &p, char const *bundled) { return p.empty() ? io::data_dir() / bundled : p; }

std::vector<corpus::Story> load_unlabeled_corpus(RunConfig const &config)
{
  if (config.unlabeled_data.empty()) { throw ConfigError("data.unlabeled is not set"); }
  return corpus::load_unlabeled(config.unlabeled_data);
}

/// Every token of every configured dataset; keeps large embedding files
/// down to the words that can ever be looked up.
std::unordered_set<std::string> dataset_tokens(RunConfig const &config)
{
  std::unordered_set<std::string> words;
  auto add = [&](std::vector<corpus::Story> const &stories) {
    for (auto const &s : stories) {
      for (auto const &b : s.body) {
        for (auto &t : corpus::tokenize(b)) { words.insert(std::move(t)); }
      }
      for (auto const &e : s.endings) {
        for (auto &t : corpus::tokenize(e)) { words.insert(std::move(t)); }
      }
    }
  };
  if (!config.train_data.empty()) { add(corpus::load_labeled(config.train_data)); }
  if (!config.test_data.empty()) { add(corpus::load_labeled(config.test_data)); }
  if (!config.unlabeled_data.empty()) { add(corpus::load_unlabeled(config.unlabeled_data)); }
  return words;
}

void say(std::ostream *log, std::string const &line)
{
  if (log != nullptr) { *log << line << std::endl; }
}

std::string fixed(double v, int digits = 4)
{
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

fs::path checkpoint_or_config(fs::path const &given, RunConfig const &config)
{
  if (!given.empty()) { return given; }
  if (config.model_checkpoint.empty()) { throw ConfigError("no checkpoint given and checkpoint.model is not set"); }
  return config.model_checkpoint;
}

void train_epoch(StoryModel const &model, std::vector<PreparedStory> &train, std::vector<ad::Tensor> &params,
                 std::vector<ad::Tensor> &all_params, ad::AdamState &state, RunConfig const &config, double lambda,
                 std::mt19937_64 &shuffle_rng, narrative::ForwardOptions const &forward, double &total_loss,
                 bool freeze_gate = false)
{
  auto gate_params = ad::tensors_of(model.gate().named_parameters());
  std::shuffle(train.begin(), train.end(), shuffle_rng);
  auto const batch = static_cast<std::size_t>(config.batch_size);
  total_loss = 0.0;
  for (std::size_t start = 0; start < train.size(); start += batch) {
    auto const count = std::min(batch, train.size() - start);
    ad::zero_grad(all_params);
    auto const loss =
      model.total_loss(std::span<PreparedStory const>(train.data() + start, count), lambda, forward);
    ad::backward(loss);
    // Zero grads make Adam leave the gate untouched.
    if (freeze_gate) { ad::zero_grad(gate_params); }
    ad::clip_grad_norm(params, config.clip_norm);
    ad::adam_step(params, state);
    total_loss += loss.item();
  }
}

corpus::Split training_split(RunConfig const &config)
{
  auto const stories = load_dataset(config.train_data, "data.train");
  auto split_rng = ad::substream(config.seed, "split");
  return corpus::split(stories, {config.train_fraction, split_rng()});
}

} // namespace

gate::Resources load_resources(RunConfig const &config, std::shared_ptr<corpus::Vocabulary const> vocabulary)
{
  gate::Resources r;
  r.vocabulary = std::move(vocabulary);
  if (config.lexicon.empty() && config.boosters.empty() && config.negations.empty()) {
    r.lexicon = std::make_shared<sentiment::SentimentLexicon const>(sentiment::SentimentLexicon::bundled());
  } else {
    r.lexicon = std::make_shared<sentiment::SentimentLexicon const>(
      sentiment::SentimentLexicon::load(or_default(config.lexicon, "lexicon.tsv"),
                                        or_default(config.boosters, "boosters.tsv"),
                                        or_default(config.negations, "negations.txt")));
  }
  r.stopwords = std::make_shared<knowledge::StopwordList const>(
    knowledge::StopwordList::load(or_default(config.stopwords, "stopwords.txt")));
  if (config.embeddings.empty()) {
    r.embeddings = std::make_shared<knowledge::EmbeddingTable const>(1);
  } else {
    auto const filter = dataset_tokens(config);
    r.embeddings = std::make_shared<knowledge::EmbeddingTable const>(
      knowledge::load_embeddings(config.embeddings, filter.empty() ? nullptr : &filter));
  }
  return r;
}

std::vector<corpus::Story> load_dataset(fs::path const &path, std::string const &key)
{
  if (path.empty()) { throw ConfigError(key + " is not set"); }
  return corpus::load_labeled(path);
}

EvalReport evaluate_model(StoryModel const &model, std::span<PreparedStory const> stories)
{
  auto const start = std::chrono::steady_clock::now();
  EvalReport report;
  report.stories.reserve(stories.size());
  for (auto const &s : stories) {
    auto p = model.predict(s);
    if (p.gold && *p.gold == p.chosen) { ++report.correct; }
    report.stories.push_back(std::move(p));
  }
  report.n = static_cast<int>(stories.size());
  report.accuracy = report.n == 0 ? 0.0 : static_cast<double>(report.correct) / report.n;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json to_json(gate::FusedPrediction const &r)
{
  nlohmann::json gate_weights;
  for (int c = 0; c < gate::kChannels; ++c) {
    gate_weights[gate::kChannelNames[static_cast<std::size_t>(c)]] = r.gate[static_cast<std::size_t>(c)];
  }
  return {{"story_id", r.story_id},
          {"kind", r.kind},
          {"gate", gate_weights},
          {"narrative", r.narrative},
          {"sentiment", r.sentiment},
          {"knowledge", r.knowledge},
          {"fused", r.fused},
          {"chosen", r.chosen},
          {"gold", r.gold ? nlohmann::json(*r.gold) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(EvalReport const &report)
{
  nlohmann::json stories = nlohmann::json::array();
  for (auto const &s : report.stories) { stories.push_back(to_json(s)); }
  return {{"accuracy", report.accuracy}, {"n", report.n},
          {"correct", report.correct},   {"seed", report.seed},
          {"wall_seconds", report.wall_seconds}, {"config", report.config},
          {"stories", std::move(stories)}};
}

void write_json(fs::path const &path, nlohmann::json const &value)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) { throw std::runtime_error("cannot write " + tmp.string()); }
    out << value.dump(2) << '\n';
    if (!out) { throw std::runtime_error("write failed for " + tmp.string()); }
  }
  fs::rename(tmp, path);
}

std::map<std::string, std::array<double, 3>> gate_means_by_kind(EvalReport const &report)
{
  std::map<std::string, std::array<double, 3>> sums;
  std::map<std::string, int> counts;
  for (auto const &s : report.stories) {
    auto &acc = sums[s.kind];
    for (std::size_t c = 0; c < 3; ++c) { acc[c] += s.gate[c]; }
    ++counts[s.kind];
  }
  for (auto &[kind, acc] : sums) {
    for (auto &v : acc) { v /= counts[kind]; }
  }
  return sums;
}

LmPretrainReport cmd_pretrain_lm(RunConfig const &config, fs::path const &out_dir, std::ostream *log)
{
  auto stories = load_unlabeled_corpus(config);
  if (!config.train_data.empty()) {
    auto const labeled = corpus::load_labeled(config.train_data);
    stories.insert(stories.end(), labeled.begin(), labeled.end());
  }
  auto const vocab = corpus::build_vocab(stories, config.min_count);

  std::vector<corpus::TokenSequence> sequences;
  for (auto const &s : stories) {
    if (s.labeled()) { continue; }
    sequences.push_back(corpus::encode_full_story(s, 0, vocab, config.transformer.window));
  }

  auto lm_config = config.transformer;
  lm_config.vocab_size = vocab.size();
  auto init = ad::substream(config.seed, "init");
  narrative::TransformerLM lm(lm_config, init);

  narrative::PretrainOptions opts;
  opts.epochs = config.lm_epochs;
  opts.batch_size = config.batch_size;
  opts.adam.learning_rate = config.lm_learning_rate;
  opts.lr_decay = config.lm_lr_decay;
  opts.clip_norm = config.clip_norm;
  opts.seed = config.seed;
  opts.on_epoch = [log](int epoch, double loss) {
    say(log, "pretrain-lm epoch " + std::to_string(epoch) + " loss " + fixed(loss));
  };

  LmPretrainReport report;
  report.result = narrative::pretrain_lm(lm, sequences, opts);

  io::Checkpoint c;
  c.metadata = lm_config.to_metadata();
  c.metadata["model"] = "lm";
  c.vocabulary = vocab.regular_tokens();
  io::store_parameters(c, lm.named_parameters());
  fs::create_directories(out_dir);
  report.checkpoint = out_dir / "lm.ckpt";
  io::write_checkpoint(report.checkpoint, c);
  say(log, "wrote " + report.checkpoint.string());
  return report;
}

SentimentPretrainReport cmd_pretrain_sentiment(RunConfig const &config, fs::path const &out_dir, std::ostream *log)
{
  auto const stories = load_unlabeled_corpus(config);
  auto const resources = load_resources(config, nullptr);
  std::vector<sentiment::StoryPolarity> polarity;
  polarity.reserve(stories.size());
  for (auto const &s : stories) { polarity.push_back(sentiment::story_polarity(s, *resources.lexicon)); }

  auto init = ad::substream(config.seed, "sentiment.init");
  sentiment::SentimentLstm lstm(init);

  sentiment::SentimentPretrainOptions opts;
  opts.epochs = config.sentiment_epochs;
  opts.batch_size = config.batch_size;
  opts.adam.learning_rate = config.sentiment_learning_rate;
  opts.clip_norm = config.clip_norm;
  opts.seed = config.seed;
  opts.on_epoch = [log](int epoch, double sim) {
    say(log, "pretrain-sentiment epoch " + std::to_string(epoch) + " mean cosine " + fixed(sim));
  };

  SentimentPretrainReport report;
  report.result = sentiment::pretrain_sentiment(lstm, polarity, opts);

  io::Checkpoint c;
  c.metadata["model"] = "sentiment";
  c.metadata["sentiment.hidden"] = std::to_string(lstm.hidden_size());
  io::store_parameters(c, lstm.named_parameters());
  fs::create_directories(out_dir);
  report.checkpoint = out_dir / "sentiment.ckpt";
  io::write_checkpoint(report.checkpoint, c);
  say(log, "wrote " + report.checkpoint.string());
  return report;
}

FinetuneReport cmd_finetune(RunConfig const &config, fs::path const &out_dir, std::ostream *log)
{
  auto const split = training_split(config);
  if (split.train.empty()) { throw ConfigError("data.train leaves no training stories after the split"); }

  std::optional<io::Checkpoint> lm_checkpoint;
  auto lm_config = config.transformer;
  std::shared_ptr<corpus::Vocabulary const> vocab;
  if (!config.lm_checkpoint.empty()) {
    lm_checkpoint = io::read_checkpoint(config.lm_checkpoint);
    if (lm_checkpoint->meta("model") != "lm") {
      throw io::CheckpointError(config.lm_checkpoint.string() + ": not a language-model checkpoint");
    }
    lm_config = narrative::TransformerConfig::from_metadata(lm_checkpoint->metadata);
    lm_config.dropout = config.transformer.dropout;
    vocab = std::make_shared<corpus::Vocabulary const>(lm_checkpoint->vocabulary);
  } else {
    auto stories = split.train;
    if (!config.unlabeled_data.empty()) {
      auto const extra = corpus::load_unlabeled(config.unlabeled_data);
      stories.insert(stories.end(), extra.begin(), extra.end());
    }
    vocab = std::make_shared<corpus::Vocabulary const>(corpus::build_vocab(stories, config.min_count));
    lm_config.vocab_size = vocab->size();
  }

  auto init = ad::substream(config.seed, "init");
  auto model = StoryModel::create(lm_config, load_resources(config, vocab), config.model_options(), init);
  if (lm_checkpoint) { io::load_parameters(*lm_checkpoint, model.narrative().named_parameters()); }
  if (!config.sentiment_checkpoint.empty()) {
    auto const c = io::read_checkpoint(config.sentiment_checkpoint);
    if (c.meta("model") != "sentiment") {
      throw io::CheckpointError(config.sentiment_checkpoint.string() + ": not a sentiment checkpoint");
    }
    io::load_parameters(c, model.sentiment().named_parameters());
  }

  auto train = model.prepare(split.train);
  auto const validation = model.prepare(split.validation);

  auto params = ad::tensors_of(model.trainable_parameters());
  auto all_params = ad::tensors_of(model.named_parameters());
  ad::AdamState state(params, ad::AdamOptions{config.learning_rate});
  auto shuffle_rng = ad::substream(config.seed, "finetune.shuffle");
  auto dropout_rng = ad::substream(config.seed, "finetune.dropout");
  narrative::ForwardOptions forward;
  if (lm_config.dropout > 0.0) { forward.dropout_rng = &dropout_rng; }

  FinetuneReport report;
  std::optional<io::Checkpoint> best;
  double best_accuracy = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    train_epoch(model, train, params, all_params, state, config, config.lambda, shuffle_rng, forward, total,
                epoch <= config.gate_warmup);
    state.options.learning_rate *= config.lr_decay;
    report.epoch_losses.push_back(total / static_cast<double>(train.size()));
    std::string line = "finetune epoch " + std::to_string(epoch) + " loss " + fixed(report.epoch_losses.back());
    if (!validation.empty()) {
      double const acc = evaluate_model(model, validation).accuracy;
      report.validation_accuracy.push_back(acc);
      line += " validation accuracy " + fixed(acc);
      if (acc > best_accuracy) {
        best_accuracy = acc;
        best = model.to_checkpoint();
        report.best_epoch = epoch;
      }
    } else {
      best = model.to_checkpoint();
      report.best_epoch = epoch;
    }
    say(log, line);
  }
  if (!best) { best = model.to_checkpoint(); }

  fs::create_directories(out_dir);
  report.checkpoint = out_dir / "model.ckpt";
  io::write_checkpoint(report.checkpoint, *best);
  auto const kept = StoryModel::from_checkpoint(*best, model.resources());
  report.validation = evaluate_model(kept, validation);
  report.validation.config = config.to_map();
  report.validation.seed = config.seed;
  write_json(out_dir / "validation.json", to_json(report.validation));
  say(log, "wrote " + report.checkpoint.string() + " (epoch " + std::to_string(report.best_epoch) + ")");
  return report;
}

EvalReport cmd_evaluate(RunConfig const &config, fs::path const &checkpoint)
{
  auto const stories = load_dataset(config.test_data, "data.test");
  auto model = StoryModel::load(checkpoint_or_config(checkpoint, config), load_resources(config, nullptr));
  if (config.mask) { model.set_mask(*config.mask); }
  auto const prepared = model.prepare(stories);
  auto report = evaluate_model(model, prepared);
  report.config = config.to_map();
  report.config["ablation"] = model.options().mask.to_string();
  report.seed = config.seed;
  return report;
}

AblationReport cmd_ablate(RunConfig const &config, fs::path const &checkpoint, bool retrain, std::ostream *log)
{
  auto const stories = load_dataset(config.test_data, "data.test");
  auto const model = StoryModel::load(checkpoint_or_config(checkpoint, config), load_resources(config, nullptr));
  auto const prepared = model.prepare(stories);

  std::vector<PreparedStory> train;
  if (retrain) { train = model.prepare(training_split(config).train); }

  auto run = [&](ChannelMask const &mask) {
    if (!retrain) {
      auto masked = model;
      masked.set_mask(mask);
      return evaluate_model(masked, prepared).accuracy;
    }
    auto refit = model.clone();
    refit.set_mask(mask);
    auto params = ad::tensors_of(refit.gate().named_parameters());
    auto all_params = ad::tensors_of(refit.named_parameters());
    ad::AdamState state(params, ad::AdamOptions{config.learning_rate});
    auto shuffle_rng = ad::substream(config.seed, "ablate.shuffle");
    auto shuffled = train;
    for (int epoch = 0; epoch < config.retrain_epochs; ++epoch) {
      double total = 0.0;
      train_epoch(refit, shuffled, params, all_params, state, config, 0.0, shuffle_rng, {}, total);
      state.options.learning_rate *= config.lr_decay;
    }
    return evaluate_model(refit, prepared).accuracy;
  };

  AblationReport report;
  report.retrained = retrain;
  report.full = evaluate_model(model, prepared).accuracy;
  for (int c = 0; c < gate::kChannels; ++c) {
    auto const ch = static_cast<Channel>(c);
    report.single.push_back({ChannelMask::only(ch), run(ChannelMask::only(ch))});
    say(log, "only " + report.single.back().mask.to_string() + ": " + fixed(report.single.back().accuracy));
  }
  for (int c = 0; c < gate::kChannels; ++c) {
    auto const ch = static_cast<Channel>(c);
    report.leave_one_out.push_back({ChannelMask::without(ch), run(ChannelMask::without(ch))});
    say(log, "without " + std::string(gate::kChannelNames[static_cast<std::size_t>(c)]) + ": " +
               fixed(report.leave_one_out.back().accuracy));
  }
  return report;
}

nlohmann::json to_json(AblationReport const &report)
{
  auto rows = [](std::vector<AblationRow> const &in) {
    nlohmann::json out = nlohmann::json::array();
    for (auto const &r : in) { out.push_back({{"channels", r.mask.to_string()}, {"accuracy", r.accuracy}}); }
    return out;
  };
  return {{"full", report.full},
          {"retrained", report.retrained},
          {"single", rows(report.single)},
          {"leave_one_out", rows(report.leave_one_out)}};
}

std::string format_ablation(AblationReport const &report)
{
  std::ostringstream out;
  out << "single channel            accuracy\n";
  for (auto const &r : report.single) { out << std::left << std::setw(26) << r.mask.to_string() << fixed(r.accuracy) << '\n'; }
  out << '\n' << "leave one out             accuracy\n";
  for (int c = 0; c < gate::kChannels; ++c) {
    auto const &r = report.leave_one_out[static_cast<std::size_t>(c)];
    out << std::left << std::setw(26) << (std::string("- ") + gate::kChannelNames[static_cast<std::size_t>(c)])
        << fixed(r.accuracy) << '\n';
  }
  out << std::left << std::setw(26) << "full model" << fixed(report.full) << '\n';
  return out.str();
}

gate::FusedPrediction cmd_inspect(RunConfig const &config, std::string const &story_id, fs::path const &checkpoint)
{
  auto const stories = load_dataset(config.test_data, "data.test");
  auto const it = std::find_if(stories.begin(), stories.end(), [&](auto const &s) { return s.id == story_id; });
  if (it == stories.end()) {
    throw std::invalid_argument("story '" + story_id + "' not found in " + config.test_data.string());
  }
  auto model = StoryModel::load(checkpoint_or_config(checkpoint, config), load_resources(config, nullptr));
  if (config.mask) { model.set_mask(*config.mask); }
  return model.predict(model.prepare(*it));
}

} // namespace cloze::harness
