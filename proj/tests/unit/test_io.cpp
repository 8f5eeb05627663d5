#include "cloze/io/checkpoint.hpp"
#include "cloze/io/data_dir.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace cloze;
using testing::read_file;

namespace {

io::Checkpoint sample()
{
  io::Checkpoint c;
  c.metadata = {{"model", "story"}, {"lambda", "0.5"}, {"empty", ""}};
  c.vocabulary = {"<pad>", "caf\xC3\xA9", "'s"};
  ad::Matrix a(2, 3);
  a << 1.0, -0.0, 3.5e-300, std::numeric_limits<double>::max(), -1.0 / 3.0, 7.0;
  c.parameters.emplace_back("w", a);
  c.parameters.emplace_back("b", ad::Matrix::Zero(1, 4));
  c.parameters.emplace_back("none", ad::Matrix(0, 5));
  return c;
}

} // namespace

TEST_CASE("checkpoint round trip")
{
  testing::TempDir dir;
  auto const c = sample();
  io::write_checkpoint(dir / "a.ckpt", c);
  auto const back = io::read_checkpoint(dir / "a.ckpt");
  CHECK(back.metadata == c.metadata);
  CHECK(back.vocabulary == c.vocabulary);
  REQUIRE(back.parameters.size() == c.parameters.size());
  for (std::size_t i = 0; i < c.parameters.size(); ++i) {
    CHECK(back.parameters[i].first == c.parameters[i].first);
    auto const &x = back.parameters[i].second;
    auto const &y = c.parameters[i].second;
    REQUIRE(x.rows() == y.rows());
    REQUIRE(x.cols() == y.cols());
    for (ad::Index j = 0; j < x.size(); ++j) {
      CHECK(std::signbit(x.data()[j]) == std::signbit(y.data()[j]));
      CHECK(x.data()[j] == y.data()[j]);
    }
  }

  io::write_checkpoint(dir / "b.ckpt", back);
  CHECK(read_file(dir / "a.ckpt") == read_file(dir / "b.ckpt"));
  CHECK_FALSE(std::filesystem::exists(dir / "a.ckpt.tmp"));

  CHECK(back.meta("model") == "story");
  CHECK_THROWS_AS(back.meta("missing"), io::CheckpointError);
  CHECK(back.find("w") != nullptr);
  CHECK(back.find("x") == nullptr);
}

TEST_CASE("corrupt checkpoints are rejected")
{
  testing::TempDir dir;
  io::write_checkpoint(dir / "good.ckpt", sample());
  auto const bytes = read_file(dir / "good.ckpt");

  CHECK_THROWS_AS(io::read_checkpoint(dir / "missing.ckpt"), io::CheckpointError);
  CHECK_THROWS_AS(io::read_checkpoint(dir.write("empty.ckpt", "")), io::CheckpointError);
  CHECK_THROWS_AS(io::read_checkpoint(dir.write("magic.ckpt", "NOTACKPT" + bytes.substr(8))), io::CheckpointError);

  auto version = bytes;
  version[8] = 9;
  CHECK_THROWS_AS(io::read_checkpoint(dir.write("version.ckpt", version)), io::CheckpointError);

  // Every proper prefix is a truncated file.
  for (std::size_t n = 0; n < bytes.size(); n += 7) {
    CHECK_THROWS_AS(io::read_checkpoint(dir.write("cut.ckpt", bytes.substr(0, n))), io::CheckpointError);
  }
  CHECK_THROWS_AS(io::read_checkpoint(dir.write("trail.ckpt", bytes + "x")), io::CheckpointError);

  try {
    io::read_checkpoint(dir.write("named.ckpt", bytes.substr(0, 20)));
  } catch (io::CheckpointError const &e) {
    CHECK(std::string(e.what()).find("named.ckpt") != std::string::npos);
  }
}

TEST_CASE("load_parameters")
{
  auto const c = sample();
  ad::Tensor w = ad::Tensor::zeros(2, 3, true);
  ad::Tensor b = ad::Tensor::zeros(1, 4, true);
  io::load_parameters(c, {{"w", w}, {"b", b}});
  CHECK(w.value() == c.find("w")->template cast<double>());

  ad::Tensor wrong = ad::Tensor::zeros(3, 2, true);
  CHECK_THROWS_AS(io::load_parameters(c, {{"w", wrong}}), io::CheckpointError);
  try {
    io::load_parameters(c, {{"absent", b}});
    FAIL("expected an error");
  } catch (io::CheckpointError const &e) {
    CHECK(std::string(e.what()).find("absent") != std::string::npos);
  }

  io::Checkpoint fresh;
  io::store_parameters(fresh, {{"w", w}});
  REQUIRE(fresh.parameters.size() == 1);
  CHECK(fresh.parameters[0].second == w.value());
}

TEST_CASE("bundled data directory")
{
  auto const dir = io::data_dir();
  for (char const *name : {"lexicon.tsv", "boosters.tsv", "negations.txt", "stopwords.txt"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
}
