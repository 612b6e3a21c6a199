#include "gef/framework/sample.hpp"

namespace gef {

Sample encode_sample(const text::SkytraxExample& ex, const text::Vocab& vocab) {
  Sample s;
  s.review = vocab.encode(ex.review);
  s.label = ex.label();
  s.subscores = ex.subscores;
  return s;
}

Sample encode_sample(const text::PCMagExample& ex, const text::Vocab& vocab) {
  Sample s;
  s.review = vocab.encode(ex.review);
  s.label = ex.label();
  for (std::size_t p = 0; p < text::kNumPolarities; ++p)
    s.comments[p] = vocab.encode(ex.comments[p]);
  return s;
}

text::Vocab build_vocab(const std::vector<text::SkytraxExample>& train, int min_freq) {
  std::vector<text::Tokens> docs;
  docs.reserve(train.size());
  for (const auto& ex : train) docs.push_back(ex.review);
  return text::Vocab::build(docs, min_freq);
}

text::Vocab build_vocab(const std::vector<text::PCMagExample>& train, int min_freq) {
  std::vector<text::Tokens> docs;
  docs.reserve(train.size() * 4);
  for (const auto& ex : train) {
    docs.push_back(ex.review);
    for (const auto& c : ex.comments) docs.push_back(c);
  }
  return text::Vocab::build(docs, min_freq);
}

}  // namespace gef
