#pragma once

#include <filesystem>

namespace cloze::io {

/// Directory holding the bundled lexicon, booster, negation and stopword
/// lists. `CLOZE_DATA_DIR` in the environment overrides the build-time path.
std::filesystem::path data_dir();

} // namespace cloze::io
