#include "cloze/corpus/csv.hpp"

#include "cloze/corpus/story.hpp"

namespace cloze::corpus::csv {

std::vector<Row> parse(std::string_view text)
{
  if (text.starts_with("\xEF\xBB\xBF")) { text.remove_prefix(3); }
  std::vector<Row> rows;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool const blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) { rows.push_back(std::move(current)); }
    current = Row{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char const c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') { ++line; }
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
    case '"':
      if (field_started) { throw DataError("line " + std::to_string(line) + ": stray quote inside unquoted field"); }
      in_quotes = true;
      field_started = true;
      break;
    case ',': end_field(); break;
    case '\r': break;
    case '\n':
      ++line;
      end_record();
      break;
    default:
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) { throw DataError("line " + std::to_string(current.line) + ": unterminated quoted field"); }
  if (field_started || !field.empty() || !current.fields.empty()) { end_record(); }
  return rows;
}

std::string format_record(Record const &record)
{
  std::string out;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i > 0) { out.push_back(','); }
    auto const &f = record[i];
    bool const quote = f.find_first_of(",\"\n\r") != std::string::npos || (!f.empty() && (f.front() == ' ' || f.back() == ' '));
    if (!quote) {
      out += f;
      continue;
    }
    out.push_back('"');
    for (char c : f) {
      if (c == '"') { out.push_back('"'); }
      out.push_back(c);
    }
    out.push_back('"');
  }
  return out;
}

} // namespace cloze::corpus::csv
