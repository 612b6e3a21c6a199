#include "gef/framework/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace gef {

namespace {

template <typename Fn>
void for_each_batch(std::span<const Sample> samples, std::size_t batch_size, Fn&& fn) {
  if (batch_size == 0) throw ContractError("batch size must be positive");
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size)
    fn(samples.subspan(begin, std::min(batch_size, samples.size() - begin)));
}

std::vector<std::vector<double>> rows_of(const Tensor& t) {
  std::vector<std::vector<double>> out(t.rows());
  const auto v = t.values();
  for (std::size_t r = 0; r < t.rows(); ++r)
    out[r].assign(v.begin() + static_cast<std::ptrdiff_t>(r * t.cols()),
                  v.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols()));
  return out;
}

std::vector<int> labels_of(std::span<const Sample> samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

}  // namespace

std::vector<Prediction> predict(const ModelBundle& model, std::span<const Sample> samples,
                                bool explain, std::size_t batch_size) {
  NoGradGuard no_grad;
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for_each_batch(samples, batch_size, [&](std::span<const Sample> batch) {
    const Tensor v = model.encode(batch);
    const auto probs = rows_of(model.predictor.probabilities(v));
    const std::size_t first = out.size();
    for (const auto& p : probs) {
      Prediction pred;
      pred.label = metrics::argmax(p);
      pred.probabilities = p;
      out.push_back(std::move(pred));
    }
    if (!explain) return;
    if (model.is_numeric()) {
      const auto heads = model.numeric_generator.head_logits(v);
      for (std::size_t f = 0; f < heads.size(); ++f) {
        const auto rows = rows_of(heads[f]);
        for (std::size_t b = 0; b < rows.size(); ++b)
          out[first + b].subscores[f] = metrics::argmax(rows[b]);
      }
    } else {
      for (int p = 0; p < text::kNumPolarities; ++p) {
        auto decoded = model.cvae.decode_greedy(v, p);
        for (std::size_t b = 0; b < decoded.size(); ++b)
          out[first + b].comments[static_cast<std::size_t>(p)] = std::move(decoded[b]);
      }
    }
  });
  return out;
}

double predictor_loss(const ModelBundle& model, std::span<const Sample> samples,
                      std::size_t batch_size) {
  if (samples.empty()) throw ContractError("predictor_loss: no samples");
  NoGradGuard no_grad;
  double total = 0.0;
  for_each_batch(samples, batch_size, [&](std::span<const Sample> batch) {
    const auto labels = labels_of(batch);
    const Tensor ce = cross_entropy_rows(model.predictor.logits(model.encode(batch)), labels);
    for (double v : ce.values()) total += v;
  });
  return total / static_cast<double>(samples.size());
}

metrics::AccuracyReport classifier_accuracy(const ClassifierBundle& c,
                                            std::span<const Sample> samples,
                                            std::size_t batch_size) {
  NoGradGuard no_grad;
  std::vector<std::vector<double>> probs;
  probs.reserve(samples.size());
  for_each_batch(samples, batch_size, [&](std::span<const Sample> batch) {
    for (auto& row : rows_of(softmax(c.golden_logits(batch)))) probs.push_back(std::move(row));
  });
  const auto labels = labels_of(samples);
  const int n = text::num_classes(c.schema);
  return {metrics::topk_accuracy(probs, labels, 1), metrics::topk_accuracy(probs, labels, std::min(3, n)),
          std::nullopt};
}

metrics::BleuReport comment_bleu(std::span<const Prediction> predictions,
                                 std::span<const Sample> samples) {
  if (predictions.size() != samples.size())
    throw DimensionError("comment_bleu: prediction and sample counts differ");
  metrics::BleuReport report;
  std::vector<Ids> all_c, all_r;
  for (std::size_t p = 0; p < text::kNumPolarities; ++p) {
    std::vector<Ids> cands, refs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      Ids ref = samples[i].comments[p];
      std::replace(ref.begin(), ref.end(), text::Vocab::kUnk, -1);
      cands.push_back(predictions[i].comments[p]);
      refs.push_back(std::move(ref));
    }
    const auto scores = metrics::bleu<int>(cands, refs).bleu;
    (p == 0 ? report.pos : p == 1 ? report.neg : report.neu) = scores;
    all_c.insert(all_c.end(), cands.begin(), cands.end());
    all_r.insert(all_r.end(), refs.begin(), refs.end());
  }
  report.all = metrics::bleu<int>(all_c, all_r).bleu;
  return report;
}

EvalReport evaluate(const ModelBundle& model, std::span<const Sample> samples,
                    std::size_t batch_size) {
  if (samples.empty()) throw ContractError("evaluate: no samples");
  EvalReport r;
  r.schema = text::to_string(model.config.schema);
  r.examples = samples.size();
  const auto preds = predict(model, samples, true, batch_size);
  std::vector<std::vector<double>> probs;
  probs.reserve(preds.size());
  for (const auto& p : preds) probs.push_back(p.probabilities);
  const auto labels = labels_of(samples);
  r.accuracy.top1 = metrics::topk_accuracy(probs, labels, 1);
  r.accuracy.top3 = metrics::topk_accuracy(probs, labels, std::min(3, model.num_classes()));
  if (model.is_numeric()) {
    std::array<double, text::kNumFields> fields{};
    for (std::size_t f = 0; f < text::kNumFields; ++f) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < samples.size(); ++i)
        hits += preds[i].subscores[f] == samples[i].subscores[f];
      fields[f] = 100.0 * static_cast<double>(hits) / static_cast<double>(samples.size());
    }
    r.accuracy.fields = fields;
  } else {
    r.bleu = comment_bleu(preds, samples);
  }
  r.oracle = classifier_accuracy(model.classifier, samples);
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"schema", schema},
                      {"examples", examples},
                      {"accuracy", metrics::to_json(accuracy)},
                      {"oracle", metrics::to_json(oracle)}};
  if (bleu) j["bleu"] = metrics::to_json(*bleu);
  return j;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char buf[160];
  out << "schema " << report.schema << ", " << report.examples << " examples\n\n";
  std::snprintf(buf, sizeof buf, "%-10s %8s %10s\n", "", "Acc%", "Top-3 Acc%");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %8.2f %10.2f\n", "model", report.accuracy.top1,
                report.accuracy.top3);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-10s %8.2f %10.2f\n", "oracle", report.oracle.top1,
                report.oracle.top3);
  out << buf;
  if (report.accuracy.fields) {
    out << '\n';
    for (const char* code : text::kFieldCodes) {
      std::snprintf(buf, sizeof buf, "%8s", code);
      out << buf;
    }
    out << '\n';
    for (double v : *report.accuracy.fields) {
      std::snprintf(buf, sizeof buf, "%8.2f", v);
      out << buf;
    }
    out << '\n';
  }
  if (report.bleu) {
    out << '\n';
    std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s %8s\n", "", "BLEU-1", "BLEU-2", "BLEU-3",
                  "BLEU-4");
    out << buf;
    const auto row = [&](const char* name, const std::array<double, metrics::kMaxBleuOrder>& b) {
      std::snprintf(buf, sizeof buf, "%-6s %8.2f %8.2f %8.2f %8.2f\n", name, b[0], b[1], b[2], b[3]);
      out << buf;
    };
    row("pos", report.bleu->pos);
    row("neg", report.bleu->neg);
    row("neu", report.bleu->neu);
    row("all", report.bleu->all);
  }
  return out.str();
}

}  // namespace gef
