#include "gef/metrics.hpp"

#include <string>

namespace gef::metrics {

int argmax(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax of empty vector");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

int class_rank(std::span<const double> probabilities, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= probabilities.size())
    throw IndexError("label " + std::to_string(label) + " out of range");
  const double p = probabilities[static_cast<std::size_t>(label)];
  int rank = 0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (probabilities[j] > p || (probabilities[j] == p && static_cast<int>(j) < label)) ++rank;
  }
  return rank;
}

double topk_accuracy(std::span<const std::vector<double>> probabilities, std::span<const int> labels,
                     int k) {
  if (probabilities.size() != labels.size())
    throw DimensionError("topk_accuracy: prediction and label counts differ");
  if (k < 1) throw ContractError("topk_accuracy: k must be >= 1");
  if (probabilities.empty()) return 0.0;
  long hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<std::size_t>(k) > probabilities[i].size())
      throw ContractError("topk_accuracy: k = " + std::to_string(k) + " exceeds " +
                          std::to_string(probabilities[i].size()) + " classes");
    if (class_rank(probabilities[i], labels[i]) < k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(labels.size());
}

nlohmann::json to_json(const AccuracyReport& report) {
  nlohmann::json j = {{"acc", report.top1}, {"top3_acc", report.top3}};
  if (report.fields) {
    const char* codes[] = {"s", "c", "f", "i", "t"};
    for (std::size_t f = 0; f < 5; ++f) j["fields"][codes[f]] = (*report.fields)[f];
  }
  return j;
}

nlohmann::json to_json(const BleuReport& report) {
  auto row = [](const std::array<double, kMaxBleuOrder>& b) {
    return nlohmann::json{{"bleu_1", b[0]}, {"bleu_2", b[1]}, {"bleu_3", b[2]}, {"bleu_4", b[3]}};
  };
  return {{"pos", row(report.pos)}, {"neg", row(report.neg)}, {"neu", row(report.neu)},
          {"all", row(report.all)}};
}

}  // namespace gef::metrics
