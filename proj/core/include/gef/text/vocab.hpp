#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gef/text/tokenizer.hpp"

namespace gef::text {

using Ids = std::vector<int>;

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumReserved = 4;

  Vocab();

  /// Tokens with frequency >= min_freq, ordered by descending frequency then
  /// lexicographically, after the reserved entries.
  static Vocab build(std::span<const Tokens> corpus, int min_freq = 2);
  /// Rebuild from an id-ordered token list (reserved entries included).
  static Vocab from_tokens(std::vector<std::string> tokens, int min_freq);

  int id(const std::string& token) const;
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;

  Ids encode(const Tokens& tokens) const;
  /// Reserved ids decode to their marker strings ("<pad>", "<unk>", ...).
  Tokens decode(std::span<const int> ids) const;

  std::size_t size() const { return tokens_.size(); }
  int min_freq() const { return min_freq_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void add(const std::string& token);

  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tokens_;
  int min_freq_ = 2;
};

}  // namespace gef::text
