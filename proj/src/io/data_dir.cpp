#include "cloze/io/data_dir.hpp"

#include <cstdlib>

#ifndef CLOZE_DEFAULT_DATA_DIR
#define CLOZE_DEFAULT_DATA_DIR "data"
#endif

namespace cloze::io {

std::filesystem::path data_dir()
{
  if (char const *env = std::getenv("CLOZE_DATA_DIR"); env != nullptr && *env != '\0') { return env; }
  return CLOZE_DEFAULT_DATA_DIR;
}

} // namespace cloze::io
