#include "cloze/corpus/csv.hpp"
#include "cloze/corpus/encode.hpp"
#include "cloze/corpus/tokenizer.hpp"
#include "cloze/corpus/vocabulary.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace cloze;
using corpus::Story;
using Tokens = std::vector<std::string>;

namespace {

Story labeled(std::string id, std::array<std::string, 4> body, std::string e1, std::string e2, int label)
{
  Story s;
  s.id = std::move(id);
  s.body = std::move(body);
  s.endings = {std::move(e1), std::move(e2)};
  s.label = label;
  return s;
}

std::vector<Story> numbered(int n)
{
  std::vector<Story> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(labeled("s" + std::to_string(i), {"a", "b", "c", "d"}, "e", "f", i % 2));
  }
  return out;
}

std::string const kHeader = "storyid,sentence1,sentence2,sentence3,sentence4,ending1,ending2,answer\n";

} // namespace

TEST_CASE("tokenize")
{
  CHECK(corpus::tokenize("Dan's parents were overweight.") == Tokens{"dan", "'s", "parents", "were", "overweight", "."});
  CHECK(corpus::tokenize("").empty());
  CHECK(corpus::tokenize("Hello, world!") == Tokens{"hello", ",", "world", "!"});
  CHECK(corpus::tokenize("She didn\xE2\x80\x99t go.") == Tokens{"she", "didn", "'t", "go", "."});
  CHECK(corpus::tokenize("  rock 'n' roll ") == Tokens{"rock", "'n", "'", "roll"});
  CHECK(corpus::tokenize("$5.99!!") == Tokens{"$", "5", ".", "99", "!", "!"});
  CHECK(corpus::tokenize("caf\xC3\xA9 au lait") == Tokens{"caf\xC3\xA9", "au", "lait"});

  CHECK(corpus::is_punctuation("."));
  CHECK(corpus::is_punctuation("'"));
  CHECK_FALSE(corpus::is_punctuation("'s"));
  CHECK_FALSE(corpus::is_punctuation("dan"));

  SUBCASE("idempotent on its joined output")
  {
    std::mt19937_64 rng(4);
    std::string const alphabet = "abcXYZ019 ,.!?'\"-()\xE2\x80\x99";
    for (int trial = 0; trial < 500; ++trial) {
      std::string s;
      int const n = std::uniform_int_distribution<int>(0, 30)(rng);
      for (int i = 0; i < n; ++i) { s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)]; }
      auto const once = corpus::tokenize(s);
      std::string joined;
      for (auto const &t : once) { joined += (joined.empty() ? "" : " ") + t; }
      CHECK(corpus::tokenize(joined) == once);
    }
  }
}

TEST_CASE("vocabulary")
{
  auto one = [](std::string sentence) {
    Story s;
    s.id = "x";
    s.body = {sentence, "", "", ""};
    s.endings = {""};
    return std::vector<Story>{s};
  };
  auto const v2 = corpus::build_vocab(one("a a b"), 2);
  CHECK(v2.contains("a"));
  CHECK_FALSE(v2.contains("b"));
  CHECK(v2.id("b") == corpus::kUnk);

  auto const v1 = corpus::build_vocab(one("b a a c b b ."), 1);
  CHECK(v1.regular_tokens() == Tokens{"b", "a", ".", "c"});
  CHECK(v1.id("b") == corpus::kReservedTokens);
  CHECK(v1.size() == corpus::kReservedTokens + 4);
  CHECK(v1.token(corpus::kClf) == "<clf>");
  CHECK(v1.token(corpus::kStart) == "<start>");
  CHECK(v1.token(corpus::kDelim) == "<delim>");
  CHECK(v1.token(corpus::kPad) == "<pad>");
  CHECK(v1.token(corpus::kUnk) == "<unk>");
  CHECK(corpus::build_vocab(one("b a a c b b ."), 1) == v1);

  for (int id = corpus::kReservedTokens; id < v1.size(); ++id) { CHECK(v1.id(v1.token(id)) == id); }

  CHECK_THROWS_AS(corpus::build_vocab(std::vector<Story>{}), corpus::DataError);
  CHECK_THROWS(corpus::Vocabulary(Tokens{"x", "x"}));
}

TEST_CASE("csv")
{
  auto const rows = corpus::csv::parse("\xEF\xBB\xBF"
                                       "a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",z\n\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].fields == corpus::csv::Record{"a", "b"});
  CHECK(rows[1].fields == corpus::csv::Record{"x, y", "say \"hi\""});
  CHECK(rows[2].fields == corpus::csv::Record{"multi\nline", "z"});
  CHECK(rows[2].line == 3);
  CHECK(corpus::csv::format_record({"plain", "a,b", "q\"q"}) == "plain,\"a,b\",\"q\"\"q\"");
}

TEST_CASE("load_labeled")
{
  testing::TempDir dir;
  SUBCASE("well-formed file")
  {
    auto const p = dir.write("ok.csv", kHeader + "1,a,b,c,d,e,f,1\n2,a,b,c,d,e,f,2\n3,\"a, really\",b,c,d,e,f,1\n");
    auto const stories = corpus::load_labeled(p);
    REQUIRE(stories.size() == 3);
    CHECK(stories[0].label == 0);
    CHECK(stories[1].label == 1);
    CHECK(stories[2].body[0] == "a, really");
  }
  SUBCASE("short row names the row")
  {
    auto const p = dir.write("short.csv", kHeader + "1,a,b,c,d,e,f,1\n2,a,b,c,d,e,1\n");
    try {
      corpus::load_labeled(p);
      FAIL("expected an error");
    } catch (corpus::DataError const &e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("answer must be 1 or 2")
  {
    auto const p = dir.write("bad.csv", kHeader + "1,a,b,c,d,e,f,3\n");
    CHECK_THROWS_AS(corpus::load_labeled(p), corpus::DataError);
  }
  SUBCASE("round trip, with and without kind")
  {
    auto stories = numbered(4);
    stories[1].body[2] = "quote \" and, comma\nnewline";
    corpus::write_labeled(dir / "rt.csv", stories);
    auto const back = corpus::load_labeled(dir / "rt.csv");
    REQUIRE(back.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(back[i].id == stories[i].id);
      CHECK(back[i].body == stories[i].body);
      CHECK(back[i].endings == stories[i].endings);
      CHECK(back[i].label == stories[i].label);
    }
    stories[0].kind = "knowledge";
    corpus::write_labeled(dir / "kind.csv", stories);
    CHECK(corpus::load_labeled(dir / "kind.csv")[0].kind == "knowledge");
  }
  SUBCASE("missing file")
  {
    CHECK_THROWS_AS(corpus::load_labeled(dir / "nope.csv"), corpus::DataError);
  }
}

TEST_CASE("load_unlabeled")
{
  testing::TempDir dir;
  auto const header = std::string("storyid,sentence1,sentence2,sentence3,sentence4,sentence5\n");
  auto const p = dir.write("u.csv", header + "1,a,b,c,d,e\n2,a,b,c,d,e\n3,a,b,c,d,e\n");
  auto const stories = corpus::load_unlabeled(p);
  REQUIRE(stories.size() == 3);
  CHECK_FALSE(stories[0].labeled());
  CHECK(stories[0].endings == Tokens{"e"});

  CHECK_THROWS_AS(corpus::load_unlabeled(dir.write("bad.csv", header + "1,a,b,c,d\n")), corpus::DataError);

  corpus::write_unlabeled(dir / "rt.csv", stories);
  auto const back = corpus::load_unlabeled(dir / "rt.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[2].body == stories[2].body);
  CHECK(back[2].endings == stories[2].endings);
}

TEST_CASE("story invariants")
{
  Story s = labeled("x", {"a", "b", "c", "d"}, "e", "f", 0);
  CHECK_NOTHROW(s.validate());
  s.label.reset();
  CHECK_THROWS_AS(s.validate(), corpus::DataError);
  s.endings = {"only"};
  CHECK_NOTHROW(s.validate());
  s.label = 0;
  CHECK_THROWS_AS(s.validate(), corpus::DataError);
}

TEST_CASE("split")
{
  auto const stories = numbered(10);
  auto const a = corpus::split(stories, {0.8, 7});
  CHECK(a.train.size() == 8);
  CHECK(a.validation.size() == 2);
  std::set<std::string> ids;
  for (auto const &s : a.train) { ids.insert(s.id); }
  for (auto const &s : a.validation) { ids.insert(s.id); }
  CHECK(ids.size() == 10);

  auto const b = corpus::split(stories, {0.8, 7});
  auto ids_of = [](std::vector<Story> const &v) {
    Tokens out;
    for (auto const &s : v) { out.push_back(s.id); }
    return out;
  };
  CHECK(ids_of(a.train) == ids_of(b.train));
  CHECK(ids_of(a.validation) == ids_of(b.validation));

  // Distinct seeds should nearly always give distinct partitions: C(10,2)=45
  // possible validation sets.
  std::set<Tokens> partitions;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto v = ids_of(corpus::split(stories, {0.8, seed}).validation);
    std::sort(v.begin(), v.end());
    partitions.insert(v);
  }
  CHECK(partitions.size() >= 10);

  CHECK(corpus::split(numbered(7), {0.5, 1}).train.size() == 4); // round(3.5)
}

TEST_CASE("encoders")
{
  Story const s = labeled("x", {"Tom ran.", "He fell.", "", "It hurt."}, "He cried.", "He laughed.", 0);
  std::vector<Story> const corpus_{s};
  auto const vocab = corpus::build_vocab(corpus_);

  SUBCASE("full story composes tokenize and vocabulary")
  {
    std::vector<int> expected{corpus::kStart};
    for (auto const &b : s.body) {
      for (auto const &t : corpus::tokenize(b)) { expected.push_back(vocab.id(t)); }
    }
    expected.push_back(corpus::kDelim);
    for (auto const &t : corpus::tokenize(s.endings[1])) { expected.push_back(vocab.id(t)); }
    expected.push_back(corpus::kClf);
    CHECK(corpus::encode_full_story(s, 1, vocab).ids == expected);
  }
  SUBCASE("empty sentences")
  {
    Story const empty = labeled("e", {"", "", "", ""}, "", "", 0);
    CHECK(corpus::encode_full_story(empty, 0, vocab).ids ==
          std::vector<int>{corpus::kStart, corpus::kDelim, corpus::kClf});
    auto const [body, ending] = corpus::encode_plot_end(empty, 1, vocab);
    CHECK(body.ids == std::vector<int>{corpus::kStart, corpus::kClf});
    CHECK(ending.ids == std::vector<int>{corpus::kStart, corpus::kClf});
  }
  SUBCASE("front truncation keeps <clf> last")
  {
    for (int window : {3, 5, 8, 128}) {
      auto const seq = corpus::encode_full_story(s, 0, vocab, window);
      CHECK(static_cast<int>(seq.size()) <= window);
      CHECK(seq.ids.back() == corpus::kClf);
      auto const [body, ending] = corpus::encode_plot_end(s, 0, vocab, window);
      CHECK(body.ids.back() == corpus::kClf);
      CHECK(ending.ids.back() == corpus::kClf);
      CHECK(static_cast<int>(body.size()) <= window);
    }
    auto const full = corpus::encode_full_story(s, 0, vocab);
    auto const cut = corpus::encode_full_story(s, 0, vocab, 5);
    CHECK(std::equal(cut.ids.begin(), cut.ids.end(), full.ids.end() - 5));
  }
  SUBCASE("candidates differ only after <delim>")
  {
    auto const a = corpus::encode_full_story(s, 0, vocab).ids;
    auto const b = corpus::encode_full_story(s, 1, vocab).ids;
    auto const delim = std::find(a.begin(), a.end(), corpus::kDelim) - a.begin();
    CHECK(std::equal(a.begin(), a.begin() + delim + 1, b.begin()));
  }
  SUBCASE("plot-end pieces")
  {
    auto const [body, ending] = corpus::encode_plot_end(s, 0, vocab);
    CHECK(body.ids.front() == corpus::kStart);
    CHECK(ending.ids == corpus::encode_sentence(s.endings[0], vocab).ids);
  }
  SUBCASE("unknown words map to <unk> and ids stay in range")
  {
    Story const other = labeled("o", {"Zebras sing.", "", "", ""}, "x", "y", 0);
    auto const seq = corpus::encode_full_story(other, 0, vocab);
    CHECK(seq.ids[1] == corpus::kUnk);
    for (int id : seq.ids) { CHECK(id < vocab.size()); }
  }
}
