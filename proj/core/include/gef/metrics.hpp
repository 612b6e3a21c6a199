#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/errors.hpp"

namespace gef::metrics {

inline constexpr int kMaxBleuOrder = 4;

enum class BleuSmoothing {
  kNone,    // a zero n-gram precision zeroes every BLEU-k with k >= n
  kAddOne,  // add-one on numerator and denominator for n >= 2
};

/// Corpus-level BLEU-1..4 (percentages).
struct BleuScores {
  std::array<double, kMaxBleuOrder> bleu{};       // BLEU-1..4, x100
  std::array<double, kMaxBleuOrder> precision{};  // clipped n-gram precisions in [0,1]
  std::array<long, kMaxBleuOrder> matches{};
  std::array<long, kMaxBleuOrder> totals{};
  double brevity_penalty = 0.0;
  long candidate_length = 0;
  long reference_length = 0;
};

/// Corpus BLEU with clipped n-gram counts, cumulative geometric means and
/// brevity penalty exp(1 - r/c) when c < r. One reference per candidate.
template <typename Token>
BleuScores bleu(std::span<const std::vector<Token>> candidates,
                std::span<const std::vector<Token>> references,
                BleuSmoothing smoothing = BleuSmoothing::kNone) {
  if (candidates.size() != references.size())
    throw DimensionError("bleu: candidate and reference counts differ");
  if (candidates.empty()) throw ContractError("bleu: empty corpus");

  BleuScores s;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    const auto& ref = references[i];
    s.candidate_length += static_cast<long>(cand.size());
    s.reference_length += static_cast<long>(ref.size());
    for (int n = 1; n <= kMaxBleuOrder; ++n) {
      std::map<std::vector<Token>, long> ref_counts, cand_counts;
      for (std::size_t k = 0; k + n <= ref.size(); ++k)
        ++ref_counts[std::vector<Token>(ref.begin() + k, ref.begin() + k + n)];
      for (std::size_t k = 0; k + n <= cand.size(); ++k)
        ++cand_counts[std::vector<Token>(cand.begin() + k, cand.begin() + k + n)];
      long matched = 0, total = 0;
      for (const auto& [gram, count] : cand_counts) {
        total += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched += std::min(count, it->second);
      }
      s.matches[n - 1] += matched;
      s.totals[n - 1] += total;
    }
  }

  const double c = static_cast<double>(s.candidate_length);
  const double r = static_cast<double>(s.reference_length);
  s.brevity_penalty = c == 0.0 ? 0.0 : (c < r ? std::exp(1.0 - r / c) : 1.0);

  double log_sum = 0.0;
  bool zero = false;
  for (int n = 0; n < kMaxBleuOrder; ++n) {
    double num = static_cast<double>(s.matches[n]);
    double den = static_cast<double>(s.totals[n]);
    if (smoothing == BleuSmoothing::kAddOne && n > 0) {
      num += 1.0;
      den += 1.0;
    }
    s.precision[n] = den > 0.0 ? num / den : 0.0;
    if (s.precision[n] <= 0.0) zero = true;
    if (!zero) log_sum += std::log(s.precision[n]);
    s.bleu[n] = zero ? 0.0 : 100.0 * s.brevity_penalty * std::exp(log_sum / (n + 1));
  }
  return s;
}

/// Top-k accuracy in percent. A class outranks the true class when its
/// probability is higher, or equal with a lower class index.
double topk_accuracy(std::span<const std::vector<double>> probabilities, std::span<const int> labels,
                     int k);

/// Rank of `label` under the tie-breaking rule above (0 = top).
int class_rank(std::span<const double> probabilities, int label);

/// Index of the largest entry, lowest index on ties.
int argmax(std::span<const double> values);

struct AccuracyReport {
  double top1 = 0.0;
  double top3 = 0.0;
  std::optional<std::array<double, 5>> fields;  // s, c, f, i, t
};

struct BleuReport {
  std::array<double, kMaxBleuOrder> pos{};
  std::array<double, kMaxBleuOrder> neg{};
  std::array<double, kMaxBleuOrder> neu{};
  std::array<double, kMaxBleuOrder> all{};
};

nlohmann::json to_json(const AccuracyReport& report);
nlohmann::json to_json(const BleuReport& report);

}  // namespace gef::metrics
