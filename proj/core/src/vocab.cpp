#include "gef/text/vocab.hpp"

#include <algorithm>
#include <map>

#include "gef/errors.hpp"

namespace gef::text {

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<unk>", "<s>", "</s>"}) add(t);
}

void Vocab::add(const std::string& token) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocab Vocab::build(std::span<const Tokens> corpus, int min_freq) {
  std::map<std::string, int> counts;
  for (const auto& seq : corpus)
    for (const auto& t : seq) ++counts[t];
  std::vector<std::pair<std::string, int>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_freq) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  v.min_freq_ = min_freq;
  for (const auto& [tok, n] : kept)
    if (!v.contains(tok)) v.add(tok);
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, int min_freq) {
  Vocab v;
  if (tokens.size() < kNumReserved) throw ValidationError("vocabulary is missing reserved entries");
  for (int i = 0; i < kNumReserved; ++i)
    if (tokens[i] != v.tokens_[i]) throw ValidationError("vocabulary reserved entries differ");
  for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw ValidationError("duplicate vocabulary entry: " + tokens[i]);
    v.add(tokens[i]);
  }
  v.min_freq_ = min_freq;
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw IndexError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(const std::string& token) const { return ids_.count(token) != 0; }

Ids Vocab::encode(const Tokens& tokens) const {
  Ids out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Tokens Vocab::decode(std::span<const int> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

}  // namespace gef::text
