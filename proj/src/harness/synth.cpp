#include "cloze/harness/synth.hpp"

#include "cloze/autodiff/parameters.hpp"
#include "cloze/knowledge/embeddings.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>

namespace cloze::harness {

namespace fs = std::filesystem;

namespace {

using Words = std::vector<std::string>;

// Four words per cluster with pairwise distinct Porter stems.
std::vector<Words> const kClusters = {
  {"oven", "stove", "skillet", "kettle"},      {"sand", "wave", "shell", "surf"},
  {"teacher", "homework", "classroom", "exam"}, {"tomato", "shovel", "soil", "hose"},
  {"snow", "sled", "scarf", "mitten"},          {"guitar", "piano", "drum", "violin"},
  {"printer", "desk", "stapler", "memo"},       {"nurse", "clinic", "bandage", "syringe"},
  {"engine", "tire", "garage", "mechanic"},     {"puppy", "leash", "collar", "kennel"},
  {"tent", "campfire", "lantern", "canoe"},     {"bread", "dough", "muffin", "bagel"},
};

Words const kNames = {"Alex",  "Blake", "Casey", "Dana",  "Eli",    "Frankie", "Gale",  "Harper",
                      "Indy",  "Jules", "Kerry", "Logan", "Morgan", "Noel",    "Oakley", "Parker",
                      "Quinn", "Riley", "Sage",  "Taylor"};

Words const kVerbs = {"checked", "carried", "noticed", "found", "moved", "cleaned", "grabbed", "saw"};

Words const kNeutralEvents = {"walked to the station", "opened the mailbox", "called a friend",
                              "read the newspaper",    "waited for the bus", "wrote a letter",
                              "sat by the window",     "looked at the clock"};

std::vector<std::pair<std::string, double>> const kPositive = {
  {"happy", 2.7},  {"glad", 2.0},     {"delighted", 3.0}, {"cheerful", 2.5},
  {"thrilled", 3.0}, {"proud", 2.3}, {"grateful", 2.5}, {"excited", 2.2}};
std::vector<std::pair<std::string, double>> const kNegative = {
  {"sad", -2.1},      {"angry", -2.3},   {"upset", -1.9},  {"miserable", -2.9},
  {"furious", -2.9}, {"worried", -1.7}, {"lonely", -2.0}, {"disappointed", -2.2}};

// Five-step event chains; the fifth step is the ending.
std::vector<Words> const kChains = {
  {"packed a suitcase", "drove to the airport", "boarded the plane", "landed in rome", "toured rome"},
  {"bought flour", "mixed the batter", "baked a cake", "frosted the cake", "served the cake"},
  {"joined a team", "practiced every day", "reached the final", "won the final", "lifted the trophy"},
  {"found a stray kitten", "fed the kitten", "bathed the kitten", "named the kitten", "adopted the kitten"},
  {"applied for a job", "wrote a resume", "had an interview", "got an offer", "started the job"},
  {"bought a ticket", "took a seat", "watched the film", "discussed the film", "reviewed the film"},
  {"planted seeds", "watered the sprouts", "pulled the weeds", "picked the carrots", "cooked the carrots"},
  {"broke a window", "called a repairman", "measured the window", "replaced the window", "painted the window"},
};

constexpr int kNoiseDims = 4;
constexpr double kEmbeddingNoise = 0.15;

class Generator
{
public:
  explicit Generator(std::mt19937_64 rng)
    : rng_(rng)
  {
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  template <typename T> T const &pick(std::vector<T> const &v) { return v[pick(v.size())]; }

  /// `count` distinct indices below n.
  std::vector<std::size_t> distinct(std::size_t n, std::size_t count)
  {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) { all[i] = i; }
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(count);
    return all;
  }

  std::mt19937_64 &rng() { return rng_; }

private:
  std::mt19937_64 rng_;
};

struct Draft
{
  std::array<std::string, 4> body;
  std::string correct;
  std::string wrong;
};

std::string sentence(std::string const &name, std::string const &rest) { return name + " " + rest + "."; }

/// A cluster keyword in s1 and a sibling word in both endings, so the
/// knowledge distances of the two endings are equal and nonzero.
std::pair<std::string, std::string> shared_cluster_pair(Generator &g)
{
  auto const &cluster = kClusters[g.pick(kClusters.size())];
  auto const words = g.distinct(cluster.size(), 2);
  return {cluster[words[0]], cluster[words[1]]};
}

Draft knowledge_story(Generator &g)
{
  std::string const &name = g.pick(kNames);
  auto const clusters = g.distinct(kClusters.size(), 5);
  std::array<std::size_t, 4> used_word{};
  Draft d;
  for (std::size_t j = 0; j < 4; ++j) {
    used_word[j] = g.pick(kClusters[clusters[j]].size());
    d.body[j] = sentence(name, g.pick(kVerbs) + " the " + kClusters[clusters[j]][used_word[j]]);
  }
  std::size_t const anchor = g.pick(4);
  auto const &anchor_cluster = kClusters[clusters[anchor]];
  std::size_t sibling = g.pick(anchor_cluster.size() - 1);
  if (sibling >= used_word[anchor]) { ++sibling; }
  std::string const verb = g.pick(kVerbs);
  d.correct = sentence(name, verb + " the " + anchor_cluster[sibling]);
  d.wrong = sentence(name, verb + " the " + g.pick(kClusters[clusters[4]]));
  return d;
}

Draft sentiment_story(Generator &g)
{
  std::string const &name = g.pick(kNames);
  auto const [body_word, ending_word] = shared_cluster_pair(g);
  auto const events = g.distinct(kNeutralEvents.size(), 2);
  Draft d;
  d.body[0] = sentence(name, g.pick(kVerbs) + " the " + body_word);
  d.body[1] = sentence(name, kNeutralEvents[events[0]]);
  d.body[2] = sentence(name, kNeutralEvents[events[1]]);
  bool const positive = g.pick(2) == 0;
  // A quarter of the time the mood is stated through a negated opposite.
  bool const negated = g.pick(4) == 0;
  auto const &stated = (positive != negated) ? kPositive : kNegative;
  d.body[3] = sentence(name, std::string(negated ? "was not " : "was ") + g.pick(stated).first);
  auto const &same = positive ? kPositive : kNegative;
  auto const &opposite = positive ? kNegative : kPositive;
  std::string const tail = " near the " + ending_word;
  d.correct = sentence(name, "felt " + g.pick(same).first + tail);
  d.wrong = sentence(name, "felt " + g.pick(opposite).first + tail);
  return d;
}

Draft narrative_story(Generator &g)
{
  std::string const &name = g.pick(kNames);
  auto const [body_word, ending_word] = shared_cluster_pair(g);
  auto const chains = g.distinct(kChains.size(), 2);
  auto const &chain = kChains[chains[0]];
  Draft d;
  for (std::size_t j = 0; j < 4; ++j) { d.body[j] = sentence(name, chain[j]); }
  d.body[0] = sentence(name, chain[0] + " near the " + body_word);
  std::string const tail = " near the " + ending_word;
  d.correct = sentence(name, chain[4] + tail);
  d.wrong = sentence(name, kChains[chains[1]][4] + tail);
  return d;
}

std::vector<corpus::Story> make_stories(SynthKind kind, int n, std::string const &split, std::mt19937_64 rng)
{
  Generator g(rng);
  // Exactly balanced labels in random order.
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) { labels[static_cast<std::size_t>(i)] = i % 2; }
  std::shuffle(labels.begin(), labels.end(), g.rng());

  std::vector<corpus::Story> out;
  out.reserve(labels.size());
  for (int i = 0; i < n; ++i) {
    SynthKind const k = kind == SynthKind::mixed ? static_cast<SynthKind>(i % 3) : kind;
    Draft const d = k == SynthKind::knowledge   ? knowledge_story(g)
                    : k == SynthKind::sentiment ? sentiment_story(g)
                                                : narrative_story(g);
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%s-%05d", to_string(kind).c_str(), split.c_str(), i);
    corpus::Story s;
    s.id = id;
    s.body = d.body;
    int const label = labels[static_cast<std::size_t>(i)];
    s.endings = label == 0 ? std::vector<std::string>{d.correct, d.wrong} : std::vector<std::string>{d.wrong, d.correct};
    s.label = label;
    if (kind == SynthKind::mixed) { s.kind = to_string(k); }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<std::string, ad::RowVector>> make_embeddings(std::mt19937_64 rng)
{
  auto const dims = static_cast<ad::Index>(kClusters.size()) + kNoiseDims;
  std::normal_distribution<double> noise(0.0, kEmbeddingNoise);
  std::vector<std::pair<std::string, ad::RowVector>> rows;
  for (std::size_t c = 0; c < kClusters.size(); ++c) {
    for (auto const &word : kClusters[c]) {
      ad::RowVector v(dims);
      for (ad::Index i = 0; i < dims; ++i) { v(i) = noise(rng); }
      v(static_cast<ad::Index>(c)) += 1.0;
      rows.emplace_back(word, v);
    }
  }
  return rows;
}

void write_text(fs::path const &path, std::string const &text)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) { throw corpus::DataError("cannot write " + tmp.string()); }
    out << text;
    if (!out) { throw corpus::DataError("write failed for " + tmp.string()); }
  }
  fs::rename(tmp, path);
}

} // namespace

SynthKind parse_synth_kind(std::string const &name)
{
  if (name == "knowledge") { return SynthKind::knowledge; }
  if (name == "sentiment") { return SynthKind::sentiment; }
  if (name == "narrative") { return SynthKind::narrative; }
  if (name == "mixed") { return SynthKind::mixed; }
  throw std::invalid_argument("unknown synthetic kind '" + name + "' (expected knowledge, sentiment, narrative or mixed)");
}

std::string to_string(SynthKind kind)
{
  switch (kind) {
  case SynthKind::knowledge: return "knowledge";
  case SynthKind::sentiment: return "sentiment";
  case SynthKind::narrative: return "narrative";
  case SynthKind::mixed: return "mixed";
  }
  return "mixed";
}

SyntheticData generate_synthetic(SynthOptions const &options)
{
  if (options.n <= 0) { throw std::invalid_argument("synthetic story count must be positive"); }
  int const test_n = options.test_n < 0 ? std::max(1, options.n / 2) : options.test_n;
  SyntheticData data;
  data.train = make_stories(options.kind, options.n, "train", ad::substream(options.seed, "synth.train"));
  data.test = make_stories(options.kind, test_n, "test", ad::substream(options.seed, "synth.test"));
  for (auto const &s : data.train) {
    corpus::Story u;
    u.id = s.id;
    u.body = s.body;
    u.endings = {s.endings[static_cast<std::size_t>(*s.label)]};
    data.unlabeled.push_back(std::move(u));
  }
  data.embeddings = make_embeddings(ad::substream(options.seed, "synth.embeddings"));
  data.lexicon.assign(kPositive.begin(), kPositive.end());
  data.lexicon.insert(data.lexicon.end(), kNegative.begin(), kNegative.end());
  std::sort(data.lexicon.begin(), data.lexicon.end());
  return data;
}

SynthFiles write_synthetic(SynthOptions const &options, fs::path const &dir)
{
  auto const data = generate_synthetic(options);
  fs::create_directories(dir);
  SynthFiles f{dir / "train.csv",     dir / "test.csv",     dir / "unlabeled.csv", dir / "embeddings.txt",
               dir / "lexicon.tsv",   dir / "boosters.tsv", dir / "negations.txt", dir / "synth.conf"};
  corpus::write_labeled(f.train, data.train);
  corpus::write_labeled(f.test, data.test);
  corpus::write_unlabeled(f.unlabeled, data.unlabeled);
  knowledge::write_embeddings(f.embeddings, data.embeddings);

  std::string lexicon;
  char buf[32];
  for (auto const &[word, valence] : data.lexicon) {
    std::snprintf(buf, sizeof(buf), "%.1f", valence);
    lexicon += word + "\t" + buf + "\n";
  }
  write_text(f.lexicon, lexicon);
  write_text(f.boosters, "very\t0.293\nreally\t0.293\n");
  write_text(f.negations, "not\nnever\nno\n");
  write_text(f.config, "# synthetic " + to_string(options.kind) + " data, seed " + std::to_string(options.seed) +
                         "\n"
                         "data.train = train.csv\n"
                         "data.test = test.csv\n"
                         "data.unlabeled = unlabeled.csv\n"
                         "embeddings = embeddings.txt\n"
                         "lexicon = lexicon.tsv\n"
                         "boosters = boosters.tsv\n"
                         "negations = negations.txt\n");
  return f;
}

} // namespace cloze::harness
