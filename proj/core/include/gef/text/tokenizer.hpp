#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gef::text {

using Tokens = std::vector<std::string>;

/// Deterministic rule tokenizer: ASCII-lowercases, splits on whitespace,
/// separates punctuation from words, keeps numbers such as "3.5" or "1,000"
/// and hyphenated words such as "glass-backed" whole, and splits the clitics
/// "n't" and "'s"/"'re"/"'ll"/... off their host word. Bytes >= 0x80 are
/// treated as word characters so UTF-8 sequences survive intact.
Tokens tokenize(std::string_view text);

/// Space-joined rendering; tokenize(join(t)) == t for tokenizer output.
std::string join(const Tokens& tokens);

}  // namespace gef::text
