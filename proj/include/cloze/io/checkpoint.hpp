#pragma once

#include "cloze/autodiff/parameters.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cloze::io {

struct CheckpointError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint, all integers and floats little-endian:
///
///   magic      8 bytes  "CLOZECKP"
///   version    u32
///   n_meta     u64, then n_meta x (key: str, value: str)
///   n_tokens   u64, then n_tokens x str           (vocabulary, id order)
///   n_params   u64, then n_params x
///                name: str, rank: u32 (= 2), rows: u64, cols: u64,
///                rows * cols x f64 in row-major order
///
/// where str is a u32 byte length followed by UTF-8 bytes. Metadata entries
/// are written in key order, so equal contents give equal bytes.
struct Checkpoint
{
  std::map<std::string, std::string> metadata;
  std::vector<std::string> vocabulary;
  std::vector<std::pair<std::string, ad::Matrix>> parameters;

  ad::Matrix const *find(std::string const &name) const;
  std::string const &meta(std::string const &key) const;
};

void write_checkpoint(std::filesystem::path const &path, Checkpoint const &checkpoint);
Checkpoint read_checkpoint(std::filesystem::path const &path);

/// Snapshot of parameter values under their names.
void store_parameters(Checkpoint &checkpoint, ad::NamedParameters const &params);
/// Copies values into `params` by name. Every parameter must be present with
/// the same shape.
void load_parameters(Checkpoint const &checkpoint, ad::NamedParameters const &params);

} // namespace cloze::io
