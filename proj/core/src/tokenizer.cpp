#include "gef/text/tokenizer.hpp"

#include <cctype>

namespace gef::text {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }

char lower(unsigned char c) { return static_cast<char>(c < 0x80 ? std::tolower(c) : c); }

// Splits a lowercased word into host + clitic ("don't" -> "do", "n't").
void emit_word(std::string word, Tokens& out) {
  if (word.size() > 3 && word.compare(word.size() - 3, 3, "n't") == 0) {
    out.push_back(word.substr(0, word.size() - 3));
    out.emplace_back("n't");
    return;
  }
  out.push_back(std::move(word));
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto at = [&](std::size_t k) -> unsigned char {
    return k < n ? static_cast<unsigned char>(text[k]) : 0;
  };
  while (i < n) {
    const unsigned char c = at(i);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::string word;
      while (i < n) {
        const unsigned char d = at(i);
        if (is_word_char(d)) {
          word.push_back(lower(d));
          ++i;
        } else if ((d == '.' || d == ',') && !word.empty() && is_digit(at(i - 1)) &&
                   is_digit(at(i + 1))) {
          word.push_back(static_cast<char>(d));  // 3.5, 1,000
          ++i;
        } else if (d == '-' && is_word_char(at(i + 1))) {
          word.push_back('-');
          ++i;
        } else if (d == '\'' && !word.empty() && word.back() == 'n' && at(i + 1) == 't' &&
                   !is_word_char(at(i + 2))) {
          word.append("'t");  // becomes the n't clitic
          i += 2;
          break;
        } else {
          break;
        }
      }
      emit_word(std::move(word), out);
      continue;
    }
    if (c == '\'' && std::isalpha(at(i + 1)) && !out.empty()) {
      std::string clitic = "'";
      ++i;
      while (i < n && std::isalpha(at(i))) clitic.push_back(lower(at(i++)));
      out.push_back(std::move(clitic));
      continue;
    }
    out.emplace_back(1, static_cast<char>(c));
    ++i;
  }
  return out;
}

std::string join(const Tokens& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s.push_back(' ');
    s += tokens[i];
  }
  return s;
}

}  // namespace gef::text
