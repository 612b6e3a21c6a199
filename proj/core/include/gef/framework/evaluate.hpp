#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/framework/model.hpp"
#include "gef/metrics.hpp"

namespace gef {

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
  nn::Subscores subscores{};     // numeric schema
  nn::CommentTriple comments;    // text schema
};

/// Predicted label distribution, and the generated explanation when
/// `explain` is set. Runs without recording gradients.
std::vector<Prediction> predict(const ModelBundle& model, std::span<const Sample> samples,
                                bool explain = true, std::size_t batch_size = 64);

/// Mean predictor cross entropy over `samples`.
double predictor_loss(const ModelBundle& model, std::span<const Sample> samples,
                      std::size_t batch_size = 64);

/// C on golden explanations.
metrics::AccuracyReport classifier_accuracy(const ClassifierBundle& c,
                                            std::span<const Sample> samples,
                                            std::size_t batch_size = 256);

struct EvalReport {
  std::string schema;
  std::size_t examples = 0;
  metrics::AccuracyReport accuracy;
  std::optional<metrics::BleuReport> bleu;
  metrics::AccuracyReport oracle;
  nlohmann::json to_json() const;
};

EvalReport evaluate(const ModelBundle& model, std::span<const Sample> samples,
                    std::size_t batch_size = 64);

/// Corpus BLEU of generated against golden comments, per polarity and pooled.
/// Unknown reference tokens never match.
metrics::BleuReport comment_bleu(std::span<const Prediction> predictions,
                                 std::span<const Sample> samples);

/// Aligned plain-text rendering of a report.
std::string format_report(const EvalReport& report);

}  // namespace gef
