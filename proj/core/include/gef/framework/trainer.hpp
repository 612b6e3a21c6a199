#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/framework/gef.hpp"
#include "gef/framework/model.hpp"
#include "gef/optim.hpp"

namespace gef {

/// How gradients cross from the generator into C.
enum class GradientMode {
  kSoft,          // C reads expected embeddings under the generator's distributions
  kStopGradient,  // C reads the decoded explanation; EF is a constant weight
};
std::string to_string(GradientMode mode);
GradientMode parse_gradient_mode(const std::string& name);

enum class Objective {
  kGef,       // L_final = w_loss * L + w_mrt * L_MRT
  kBaseline,  // L_final = L; C is never consulted
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::size_t max_steps = 0;  // 0 means no cap
  GradientMode gradient_mode = GradientMode::kSoft;
  LossWeights weights;
  bool explanation_loss = true;  // false drops L_e from L
  bool predictor_freeze = false;
  std::optional<double> freeze_threshold;  // unset: margin x dev L_p at its first minimum
  double freeze_margin = 1.05;
  double kl_anneal_fraction = 0.2;

  /// Batch 64 and soft mode for skytrax; batch 32, stop-gradient and the
  /// predictor freeze for pcmag.
  static TrainConfig defaults(text::Schema schema);
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Batch means of one step, or means over an epoch's steps.
struct LossBreakdown {
  double L_p = 0.0;
  double L_e = 0.0;
  double L = 0.0;
  double EF = 0.0;
  double L_MRT = 0.0;
  double L_final = 0.0;
  nlohmann::json to_json() const;
  static LossBreakdown from_json(const nlohmann::json& j);
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  std::size_t steps = 0;
  LossBreakdown loss;
  double dev_acc = 0.0;
  double dev_top3 = 0.0;
  double dev_L_p = 0.0;
  bool predictor_frozen = false;
  nlohmann::json to_json() const;
  static EpochLog from_json(const nlohmann::json& j);
};

class Trainer {
 public:
  using EpochCallback = std::function<void(const EpochLog&)>;

  Trainer(ModelBundle& model, TrainConfig config, Objective objective = Objective::kGef);

  /// One optimizer step on `batch`.
  LossBreakdown step(std::span<const Sample> batch);

  /// Trains until `epochs` (or `max_steps`) is reached, continuing from any
  /// resumed state. Throws DivergenceError on a non-finite loss.
  std::vector<EpochLog> fit(const std::vector<Sample>& train, const std::vector<Sample>& dev,
                            const EpochCallback& on_epoch = {});

  /// Model, optimizer moments, RNG and schedule state.
  void save_state(const std::filesystem::path& path) const;
  void load_state(const std::filesystem::path& path);

  const std::vector<LossBreakdown>& step_log() const { return step_log_; }
  const std::vector<EpochLog>& history() const { return history_; }
  bool predictor_frozen() const { return frozen_; }
  std::optional<double> freeze_threshold() const { return threshold_; }
  std::size_t epochs_completed() const { return history_.size(); }
  const TrainConfig& config() const { return config_; }
  Objective objective() const { return objective_; }

 private:
  LossBreakdown step_impl(std::span<const Sample> batch, std::span<const double> p_gold);
  LossBreakdown forward_backward(std::span<const Sample> batch, std::span<const double> p_gold);
  Tensor explanation_loss_rows(const Tensor& v, std::span<const Sample> batch, double kl_weight,
                               std::vector<Tensor>* head_logits);
  Tensor classified_probability(const Tensor& v, std::span<const Sample> batch,
                                const std::vector<Tensor>& head_logits) const;
  double kl_weight() const;
  std::vector<bool> active_mask() const;

  ModelBundle& model_;
  TrainConfig config_;
  Objective objective_;
  ParameterList params_;
  std::size_t predictor_begin_ = 0;
  std::size_t predictor_end_ = 0;
  Adam adam_;
  Rng rng_;
  std::size_t total_steps_ = 0;
  std::vector<LossBreakdown> step_log_;
  std::vector<EpochLog> history_;
  bool frozen_ = false;
  std::optional<double> threshold_;
};

/// Probabilities C assigns to the true class given golden explanations.
std::vector<double> golden_probabilities(const ClassifierBundle& c, std::span<const Sample> samples,
                                         std::size_t batch_size = 256);

struct PretrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;  // epochs without dev improvement before stopping
  std::uint64_t seed = 1;
};

struct PretrainResult {
  std::vector<nlohmann::json> log;  // {epoch, loss, dev_acc}
  double best_dev_acc = 0.0;
  std::size_t best_epoch = 0;
};

/// Trains C on golden explanations, restores the best dev epoch, freezes it
/// and records the dev accuracy in `c.oracle`.
PretrainResult pretrain_classifier(ClassifierBundle& c, const std::vector<Sample>& train,
                                   const std::vector<Sample>& dev, const PretrainConfig& config);

}  // namespace gef
