#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cloze::corpus {

/// Rule-based word tokenizer.
///
/// Rules, applied left to right over the lowercased input:
///   - ASCII whitespace separates tokens and is dropped;
///   - a word is a maximal run of ASCII letters, digits and non-ASCII bytes;
///   - an apostrophe (' or U+2019) directly followed by a word character starts
///     a clitic token made of the apostrophe and that word run ("'s", "'t");
///   - any other character is a single-character punctuation token.
/// U+2019 is normalized to '. The rules are closed under re-tokenizing the
/// space-joined output.
std::vector<std::string> tokenize(std::string_view sentence);

bool is_punctuation(std::string_view token);

} // namespace cloze::corpus
