#include <doctest.h>

#include <algorithm>
#include <random>

#include "gef/metrics.hpp"
#include "gef/text/tokenizer.hpp"

using namespace gef;
using namespace gef::metrics;
using text::Tokens;
using text::tokenize;

namespace {

BleuScores corpus_bleu(const std::vector<std::string>& cands, const std::vector<std::string>& refs,
                       BleuSmoothing smoothing = BleuSmoothing::kNone) {
  std::vector<Tokens> c, r;
  for (const auto& s : cands) c.push_back(tokenize(s));
  for (const auto& s : refs) r.push_back(tokenize(s));
  return bleu<std::string>(c, r, smoothing);
}

}  // namespace

TEST_CASE("bleu identity and disjoint pairs") {
  const auto same = corpus_bleu({"the cat sat on the mat", "a dog ran home"},
                                {"the cat sat on the mat", "a dog ran home"});
  for (double b : same.bleu) CHECK(b == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(same.brevity_penalty == 1.0);

  const auto none = corpus_bleu({"red green blue"}, {"one two three"});
  for (double b : none.bleu) CHECK(b == 0.0);
}

TEST_CASE("bleu clipping") {
  const auto s = corpus_bleu({"the the the"}, {"the cat sat"});
  CHECK(s.matches[0] == 1);
  CHECK(s.totals[0] == 3);
  CHECK(s.precision[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(s.bleu[0] - 100.0 / 3.0) < 1e-9);
  CHECK(s.bleu[1] == 0.0);
}

TEST_CASE("bleu hand-computed n-gram fixture") {
  // unigrams 5/6, bigrams 3/5, trigrams 1/4, 4-grams 0/3, equal lengths
  const auto s = corpus_bleu({"the cat sat on the mat"}, {"the cat is on the mat"});
  CHECK(s.matches == std::array<long, 4>{5, 3, 1, 0});
  CHECK(s.totals == std::array<long, 4>{6, 5, 4, 3});
  CHECK(std::abs(s.bleu[0] - 500.0 / 6.0) < 1e-9);
  CHECK(std::abs(s.bleu[1] - 100.0 * std::sqrt(0.5)) < 1e-9);
  CHECK(std::abs(s.bleu[2] - 50.0) < 1e-9);
  CHECK(s.bleu[3] == 0.0);

  // add-one smoothing for n >= 2: (3+1)/(5+1), (1+1)/(4+1), (0+1)/(3+1)
  const auto sm = corpus_bleu({"the cat sat on the mat"}, {"the cat is on the mat"},
                              BleuSmoothing::kAddOne);
  const double g4 = std::pow(5.0 / 6.0 * 4.0 / 6.0 * 2.0 / 5.0 * 1.0 / 4.0, 0.25);
  CHECK(std::abs(sm.bleu[3] - 100.0 * g4) < 1e-9);
}

TEST_CASE("bleu brevity penalty") {
  const auto s = corpus_bleu({"the cat"}, {"the cat sat"});
  CHECK(s.brevity_penalty == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(std::abs(s.bleu[0] - 100.0 * std::exp(-0.5)) < 1e-9);
  CHECK(std::abs(s.bleu[1] - 100.0 * std::exp(-0.5)) < 1e-9);
  CHECK(s.bleu[2] == 0.0);

  const auto longer = corpus_bleu({"the cat sat down"}, {"the cat sat"});
  CHECK(longer.brevity_penalty == 1.0);
}

TEST_CASE("bleu errors") {
  std::vector<Tokens> one = {{"a"}};
  std::vector<Tokens> two = {{"a"}, {"b"}};
  std::vector<Tokens> empty;
  CHECK_THROWS_AS(bleu<std::string>(one, two), DimensionError);
  CHECK_THROWS_AS(bleu<std::string>(empty, empty), ContractError);
}

TEST_CASE("bleu properties on random corpora") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> word(0, 7), len(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<int>> cands(6), refs(6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (int k = len(rng); k > 0; --k) cands[i].push_back(word(rng));
      for (int k = len(rng); k > 0; --k) refs[i].push_back(word(rng));
    }
    const auto s = bleu<int>(cands, refs);
    for (int n = 0; n < kMaxBleuOrder; ++n) {
      CHECK(s.bleu[n] >= 0.0);
      CHECK(s.bleu[n] <= 100.0);
      if (n > 0) CHECK(s.bleu[n] <= s.bleu[n - 1] + 1e-12);
      if (s.precision[n] == 0.0)
        for (int m = n; m < kMaxBleuOrder; ++m) CHECK(s.bleu[m] == 0.0);
    }

    std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<int>> pc, pr;
    for (auto i : order) {
      pc.push_back(cands[i]);
      pr.push_back(refs[i]);
    }
    const auto p = bleu<int>(pc, pr);
    for (int n = 0; n < kMaxBleuOrder; ++n) CHECK(p.bleu[n] == doctest::Approx(s.bleu[n]).epsilon(1e-12));
  }
}

TEST_CASE("top-k accuracy on a hand fixture") {
  // ranks of the true label: 0, 3, 2, 3, 1, 1 (ties go to the lower index)
  const std::vector<std::vector<double>> probs = {
      {0.1, 0.2, 0.3, 0.4},     {0.1, 0.2, 0.3, 0.4}, {0.25, 0.25, 0.25, 0.25},
      {0.25, 0.25, 0.25, 0.25}, {0.5, 0.3, 0.1, 0.1}, {0.4, 0.4, 0.1, 0.1}};
  const std::vector<int> labels = {3, 0, 2, 3, 1, 1};
  CHECK(topk_accuracy(probs, labels, 1) == doctest::Approx(100.0 / 6.0));
  CHECK(topk_accuracy(probs, labels, 2) == doctest::Approx(50.0));
  CHECK(topk_accuracy(probs, labels, 3) == doctest::Approx(400.0 / 6.0));
  CHECK(topk_accuracy(probs, labels, 4) == doctest::Approx(100.0));
  CHECK_THROWS_AS(topk_accuracy(probs, labels, 5), ContractError);
  CHECK_THROWS_AS(topk_accuracy(probs, labels, 0), ContractError);
  CHECK(class_rank(probs[5], 0) == 0);
  CHECK(argmax(probs[2]) == 0);
}

TEST_CASE("top-k is monotone in k and one-hot predictions score 100") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 9);
  std::vector<std::vector<double>> probs(200, std::vector<double>(10));
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (auto& p : probs[i]) p = u(rng);
    labels[i] = cls(rng);
  }
  double prev = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double acc = topk_accuracy(probs, labels, k);
    CHECK(acc >= prev);
    prev = acc;
  }
  CHECK(prev == 100.0);

  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::fill(probs[i].begin(), probs[i].end(), 0.0);
    probs[i][static_cast<std::size_t>(labels[i])] = 1.0;
  }
  CHECK(topk_accuracy(probs, labels, 1) == 100.0);
}

TEST_CASE("report serialization uses field codes") {
  AccuracyReport r;
  r.top1 = 40.0;
  r.top3 = 70.0;
  r.fields = std::array<double, 5>{1, 2, 3, 4, 5};
  const auto j = to_json(r);
  CHECK(j["acc"] == 40.0);
  CHECK(j["fields"]["s"] == 1.0);
  CHECK(j["fields"]["t"] == 5.0);
  BleuReport b;
  b.pos[0] = 12.5;
  CHECK(to_json(b)["pos"]["bleu_1"] == 12.5);
}
