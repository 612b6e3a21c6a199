#pragma once

#include <array>
#include <vector>

#include "gef/nn/classifier.hpp"
#include "gef/text/dataset.hpp"
#include "gef/text/vocab.hpp"

namespace gef {

using text::Ids;

/// An example in id space. Numeric examples fill `subscores`, text examples
/// fill `comments`.
struct Sample {
  text::Ids review;
  int label = 0;
  nn::Subscores subscores{};
  nn::CommentTriple comments;
};

Sample encode_sample(const text::SkytraxExample& ex, const text::Vocab& vocab);
Sample encode_sample(const text::PCMagExample& ex, const text::Vocab& vocab);

template <typename Example>
std::vector<Sample> encode_samples(const std::vector<Example>& examples, const text::Vocab& vocab) {
  std::vector<Sample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(encode_sample(ex, vocab));
  return out;
}

/// Vocabulary over reviews and comments of the training split.
text::Vocab build_vocab(const std::vector<text::SkytraxExample>& train, int min_freq = 2);
text::Vocab build_vocab(const std::vector<text::PCMagExample>& train, int min_freq = 2);

}  // namespace gef
