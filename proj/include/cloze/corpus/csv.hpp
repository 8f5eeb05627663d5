#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cloze::corpus::csv {

using Record = std::vector<std::string>;

struct Row
{
  Record fields;
  // 1-based physical line where the record starts.
  std::size_t line = 0;
};

/// RFC 4180 reader: comma separated, double-quoted fields may hold commas,
/// newlines and doubled quotes. CRLF and a leading UTF-8 BOM are accepted.
std::vector<Row> parse(std::string_view text);

std::string format_record(Record const &record);

} // namespace cloze::corpus::csv
