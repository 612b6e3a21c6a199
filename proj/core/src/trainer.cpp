#include "gef/framework/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gef/framework/evaluate.hpp"

namespace gef {

using text::Schema;

std::string to_string(GradientMode mode) {
  return mode == GradientMode::kSoft ? "soft" : "stop-gradient";
}

GradientMode parse_gradient_mode(const std::string& name) {
  if (name == "soft") return GradientMode::kSoft;
  if (name == "stop-gradient" || name == "stop") return GradientMode::kStopGradient;
  throw ValidationError("unknown gradient mode '" + name + "' (expected soft|stop-gradient)");
}

// ---- config and logs ------------------------------------------------------------

TrainConfig TrainConfig::defaults(Schema schema) {
  TrainConfig c;
  if (schema == Schema::kPCMag) {
    c.batch_size = 32;
    c.gradient_mode = GradientMode::kStopGradient;
    c.predictor_freeze = true;
  }
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (epochs == 0) throw ValidationError("epochs must be positive");
  if (!(weights.loss >= 0.0) || !(weights.mrt >= 0.0) || weights.loss + weights.mrt <= 0.0)
    throw ValidationError("loss weights must be non-negative and not both zero");
  if (freeze_threshold && !(*freeze_threshold >= 0.0))
    throw ValidationError("freeze_threshold must be non-negative");
  if (!(freeze_margin > 0.0)) throw ValidationError("freeze_margin must be positive");
  if (!(kl_anneal_fraction >= 0.0 && kl_anneal_fraction <= 1.0))
    throw ValidationError("kl_anneal_fraction must lie in [0, 1]");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"batch_size", batch_size},
                      {"learning_rate", learning_rate},
                      {"epochs", epochs},
                      {"seed", seed},
                      {"max_steps", max_steps},
                      {"gradient_mode", gef::to_string(gradient_mode)},
                      {"weight_loss", weights.loss},
                      {"weight_mrt", weights.mrt},
                      {"explanation_loss", explanation_loss},
                      {"predictor_freeze", predictor_freeze},
                      {"freeze_margin", freeze_margin},
                      {"kl_anneal_fraction", kl_anneal_fraction}};
  j["freeze_threshold"] = freeze_threshold ? nlohmann::json(*freeze_threshold) : nlohmann::json();
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_steps = j.at("max_steps").get<std::size_t>();
  c.gradient_mode = parse_gradient_mode(j.at("gradient_mode").get<std::string>());
  c.weights = {j.at("weight_loss").get<double>(), j.at("weight_mrt").get<double>()};
  c.explanation_loss = j.at("explanation_loss").get<bool>();
  c.predictor_freeze = j.at("predictor_freeze").get<bool>();
  if (!j.at("freeze_threshold").is_null()) c.freeze_threshold = j.at("freeze_threshold").get<double>();
  c.freeze_margin = j.at("freeze_margin").get<double>();
  c.kl_anneal_fraction = j.at("kl_anneal_fraction").get<double>();
  return c;
}

nlohmann::json LossBreakdown::to_json() const {
  return {{"L_p", L_p}, {"L_e", L_e}, {"L", L}, {"EF", EF}, {"L_MRT", L_MRT}, {"L_final", L_final}};
}

LossBreakdown LossBreakdown::from_json(const nlohmann::json& j) {
  return {j.at("L_p").get<double>(), j.at("L_e").get<double>(),   j.at("L").get<double>(),
          j.at("EF").get<double>(),  j.at("L_MRT").get<double>(), j.at("L_final").get<double>()};
}

nlohmann::json EpochLog::to_json() const {
  return {{"epoch", epoch},        {"L_p", loss.L_p},
          {"L_e", loss.L_e},       {"L", loss.L},
          {"EF_mean", loss.EF},    {"L_MRT", loss.L_MRT},
          {"L_final", loss.L_final}, {"dev_acc", dev_acc},
          {"dev_top3", dev_top3},  {"dev_L_p", dev_L_p},
          {"steps", steps},        {"predictor_frozen", predictor_frozen}};
}

EpochLog EpochLog::from_json(const nlohmann::json& j) {
  EpochLog e;
  e.epoch = j.at("epoch").get<std::size_t>();
  e.steps = j.at("steps").get<std::size_t>();
  e.loss = {j.at("L_p").get<double>(),     j.at("L_e").get<double>(),
            j.at("L").get<double>(),       j.at("EF_mean").get<double>(),
            j.at("L_MRT").get<double>(),   j.at("L_final").get<double>()};
  e.dev_acc = j.at("dev_acc").get<double>();
  e.dev_top3 = j.at("dev_top3").get<double>();
  e.dev_L_p = j.at("dev_L_p").get<double>();
  e.predictor_frozen = j.at("predictor_frozen").get<bool>();
  return e;
}

// ---- trainer --------------------------------------------------------------------

Trainer::Trainer(ModelBundle& model, TrainConfig config, Objective objective)
    : model_(model),
      config_(std::move(config)),
      objective_(objective),
      params_(model.trainable_parameters()),
      adam_(params_, config_.learning_rate),
      rng_(config_.seed) {
  config_.validate();
  predictor_begin_ = model.encoder_parameters().size();
  predictor_end_ = predictor_begin_ + model.predictor_parameters().size();
  threshold_ = config_.freeze_threshold;
}

std::vector<bool> Trainer::active_mask() const {
  if (!frozen_) return {};
  std::vector<bool> active(params_.size(), true);
  for (std::size_t i = predictor_begin_; i < predictor_end_; ++i) active[i] = false;
  return active;
}

double Trainer::kl_weight() const {
  const double warmup = config_.kl_anneal_fraction * static_cast<double>(total_steps_);
  if (warmup <= 0.0) return 1.0;
  return std::min(1.0, static_cast<double>(step_log_.size() + 1) / warmup);
}

Tensor Trainer::explanation_loss_rows(const Tensor& v, std::span<const Sample> batch,
                                      double kl_weight, std::vector<Tensor>* head_logits) {
  const std::size_t b = batch.size();
  if (model_.is_numeric()) {
    *head_logits = model_.numeric_generator.head_logits(v);
    if (!config_.explanation_loss) return Tensor::zeros({b, 1});
    Tensor total;
    for (std::size_t f = 0; f < text::kNumFields; ++f) {
      std::vector<int> targets;
      targets.reserve(b);
      for (const auto& s : batch) targets.push_back(s.subscores[f]);
      const Tensor ce = cross_entropy_rows((*head_logits)[f], targets);
      total = total.defined() ? add(total, ce) : ce;
    }
    return total;
  }
  if (!config_.explanation_loss) return Tensor::zeros({b, 1});
  Tensor total;
  for (int p = 0; p < text::kNumPolarities; ++p) {
    std::vector<Ids> comments;
    comments.reserve(b);
    for (const auto& s : batch) comments.push_back(s.comments[static_cast<std::size_t>(p)]);
    const Tensor loss = model_.cvae.elbo(v, p, comments, kl_weight, rng_).loss;
    total = total.defined() ? add(total, loss) : loss;
  }
  return total;
}

Tensor Trainer::classified_probability(const Tensor& v, std::span<const Sample> batch,
                                       const std::vector<Tensor>& head_logits) const {
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const auto& s : batch) labels.push_back(s.label);
  const ClassifierBundle& c = model_.classifier;
  const bool soft = config_.gradient_mode == GradientMode::kSoft;

  if (model_.is_numeric()) {
    if (soft) {
      std::vector<Tensor> probs;
      for (const auto& h : head_logits) probs.push_back(softmax(h));
      return pick(softmax(c.numeric.logits_soft(probs)), labels);
    }
    NoGradGuard no_grad;
    std::vector<nn::Subscores> scores(batch.size());
    for (std::size_t f = 0; f < head_logits.size(); ++f) {
      const auto hv = head_logits[f].values();
      for (std::size_t r = 0; r < batch.size(); ++r)
        scores[r][f] = metrics::argmax(hv.subspan(r * text::kScoreLevels, text::kScoreLevels));
    }
    return pick(softmax(c.numeric.logits(scores)), labels);
  }

  if (soft) {
    std::vector<std::array<Tensor, text::kNumPolarities>> dists(batch.size());
    for (int p = 0; p < text::kNumPolarities; ++p) {
      auto decoded = model_.cvae.decode_soft(v, p);
      for (std::size_t r = 0; r < batch.size(); ++r)
        dists[r][static_cast<std::size_t>(p)] = decoded.distributions[r];
    }
    return pick(softmax(c.text.logits_soft(dists)), labels);
  }
  NoGradGuard no_grad;
  std::vector<nn::CommentTriple> triples(batch.size());
  for (int p = 0; p < text::kNumPolarities; ++p) {
    auto decoded = model_.cvae.decode_greedy(v, p);
    for (std::size_t r = 0; r < batch.size(); ++r)
      triples[r][static_cast<std::size_t>(p)] = std::move(decoded[r]);
  }
  return pick(softmax(c.text.logits(triples)), labels);
}

LossBreakdown Trainer::step(std::span<const Sample> batch) {
  std::vector<double> gold;
  if (objective_ == Objective::kGef) gold = golden_probabilities(model_.classifier, batch);
  return step_impl(batch, gold);
}

LossBreakdown Trainer::step_impl(std::span<const Sample> batch, std::span<const double> p_gold) {
  try {
    return forward_backward(batch, p_gold);
  } catch (const NumericError& e) {
    throw DivergenceError("non-finite value at step " + std::to_string(step_log_.size() + 1) +
                          ": " + e.what());
  }
}

LossBreakdown Trainer::forward_backward(std::span<const Sample> batch,
                                        std::span<const double> p_gold) {
  if (batch.empty()) throw ContractError("train step: empty batch");
  const std::size_t b = batch.size();
  std::vector<int> labels;
  labels.reserve(b);
  for (const auto& s : batch) labels.push_back(s.label);

  Tape tape;
  const Tensor v = model_.encode(batch);
  const Tensor logits = model_.predictor.logits(v);
  const Tensor lp_rows = cross_entropy_rows(logits, labels);
  std::vector<Tensor> heads;
  const Tensor le_rows = explanation_loss_rows(v, batch, kl_weight(), &heads);
  const Tensor L_p = mean(lp_rows);
  const Tensor L_e = mean(le_rows);
  const Tensor L = add(L_p, L_e);

  LossBreakdown out;
  Tensor objective = L;
  if (objective_ == Objective::kGef) {
    if (p_gold.size() != b) throw DimensionError("train step: gold probability count differs");
    const Tensor pred = detach(pick(softmax(logits), labels));
    const Tensor gold = Tensor::from({b, 1}, std::vector<double>(p_gold.begin(), p_gold.end()));
    const Tensor classified = classified_probability(v, batch, heads);
    const Tensor ef = explanation_factor(pred, classified, gold);
    const Tensor mrt = mrt_loss(add(lp_rows, le_rows), ef);
    objective = final_loss(L, mrt, config_.weights);
    out.EF = mean(ef).item();
    out.L_MRT = mrt.item();
  }
  out.L_p = L_p.item();
  out.L_e = L_e.item();
  out.L = L.item();
  out.L_final = objective.item();

  if (!std::isfinite(out.L_final) || !std::isfinite(out.L_MRT)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << step_log_.size() + 1 << ": "
        << out.to_json().dump();
    throw DivergenceError(msg.str());
  }

  tape.backward(objective);
  adam_.step(active_mask());
  adam_.zero_grad();
  step_log_.push_back(out);
  return out;
}

std::vector<double> golden_probabilities(const ClassifierBundle& c, std::span<const Sample> samples,
                                         std::size_t batch_size) {
  NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(samples.size());
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
    const auto batch = samples.subspan(begin, std::min(batch_size, samples.size() - begin));
    const Tensor probs = softmax(c.golden_logits(batch));
    for (std::size_t r = 0; r < batch.size(); ++r)
      out.push_back(probs.at(r, static_cast<std::size_t>(batch[r].label)));
  }
  return out;
}

std::vector<EpochLog> Trainer::fit(const std::vector<Sample>& train, const std::vector<Sample>& dev,
                                   const EpochCallback& on_epoch) {
  if (train.empty()) throw ContractError("fit: empty training split");
  const std::size_t bs = config_.batch_size;
  const std::size_t per_epoch = (train.size() + bs - 1) / bs;
  total_steps_ = per_epoch * config_.epochs;
  if (config_.max_steps > 0) total_steps_ = std::min(total_steps_, config_.max_steps);

  std::vector<double> gold_cache;
  if (objective_ == Objective::kGef) gold_cache = golden_probabilities(model_.classifier, train);

  std::vector<EpochLog> produced;
  std::vector<Sample> batch;
  std::vector<double> gold;
  while (history_.size() < config_.epochs && step_log_.size() < total_steps_) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_);

    EpochLog log;
    log.epoch = history_.size() + 1;
    double running_lp = 0.0;
    for (std::size_t begin = 0; begin < order.size() && step_log_.size() < total_steps_;
         begin += bs) {
      batch.clear();
      gold.clear();
      for (std::size_t k = begin; k < std::min(begin + bs, order.size()); ++k) {
        batch.push_back(train[order[k]]);
        if (!gold_cache.empty()) gold.push_back(gold_cache[order[k]]);
      }
      const LossBreakdown s = step_impl(batch, gold);
      ++log.steps;
      log.loss.L_p += s.L_p;
      log.loss.L_e += s.L_e;
      log.loss.L += s.L;
      log.loss.EF += s.EF;
      log.loss.L_MRT += s.L_MRT;
      log.loss.L_final += s.L_final;
      running_lp = log.loss.L_p / static_cast<double>(log.steps);
      if (config_.predictor_freeze && !frozen_ && threshold_ && running_lp < *threshold_)
        frozen_ = true;
    }
    const double n = static_cast<double>(std::max<std::size_t>(log.steps, 1));
    log.loss.L_p /= n;
    log.loss.L_e /= n;
    log.loss.L /= n;
    log.loss.EF /= n;
    log.loss.L_MRT /= n;
    log.loss.L_final /= n;

    if (!dev.empty()) {
      const auto preds = predict(model_, dev, false);
      std::vector<std::vector<double>> probs;
      std::vector<int> labels;
      for (std::size_t i = 0; i < dev.size(); ++i) {
        probs.push_back(preds[i].probabilities);
        labels.push_back(dev[i].label);
      }
      log.dev_acc = metrics::topk_accuracy(probs, labels, 1);
      log.dev_top3 = metrics::topk_accuracy(probs, labels, std::min(3, model_.num_classes()));
      log.dev_L_p = predictor_loss(model_, dev);
      // First minimum of dev L_p: the epoch before the first rise.
      if (config_.predictor_freeze && !threshold_ && !history_.empty() &&
          log.dev_L_p > history_.back().dev_L_p)
        threshold_ = config_.freeze_margin * history_.back().dev_L_p;
    }
    log.predictor_frozen = frozen_;
    history_.push_back(log);
    produced.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return produced;
}

// ---- state ----------------------------------------------------------------------

void Trainer::save_state(const std::filesystem::path& path) const {
  std::ostringstream rng_state;
  rng_state << rng_;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : step_log_) steps.push_back(s.to_json());
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : history_) epochs.push_back(e.to_json());
  const AdamState& st = adam_.state();
  nlohmann::json extra = {{"train_config", config_.to_json()},
                          {"objective", objective_ == Objective::kGef ? "gef" : "baseline"},
                          {"rng", rng_state.str()},
                          {"adam_step", st.step},
                          {"predictor_frozen", frozen_},
                          {"steps", steps},
                          {"epochs", epochs}};
  extra["freeze_threshold"] = threshold_ ? nlohmann::json(*threshold_) : nlohmann::json();

  nlohmann::json m = model_.manifest();
  m["trainer"] = extra;
  ParameterList tensors = model_.all_parameters();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Shape& shape = params_[i].tensor.shape();
    tensors.push_back({"adam.m." + params_[i].name, Tensor::from(shape, st.m[i])});
    tensors.push_back({"adam.v." + params_[i].name, Tensor::from(shape, st.v[i])});
  }
  save_checkpoint(path, m, tensors);
}

void Trainer::load_state(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (!ckpt.manifest.contains("trainer"))
    throw ValidationError(path.string() + " holds no trainer state");
  const auto& t = ckpt.manifest.at("trainer");
  const std::string schema = ckpt.manifest.at("model").at("schema").get<std::string>();
  if (schema != text::to_string(model_.config.schema))
    throw ValidationError("checkpoint schema " + schema + " does not match the model");

  restore_parameters(ckpt, params_);
  AdamState& st = adam_.state();
  st.step = t.at("adam_step").get<std::int64_t>();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto m = ckpt.get("adam.m." + params_[i].name).values();
    const auto v = ckpt.get("adam.v." + params_[i].name).values();
    if (m.size() != st.m[i].size() || v.size() != st.v[i].size())
      throw ValidationError("optimizer state shape mismatch for " + params_[i].name);
    st.m[i].assign(m.begin(), m.end());
    st.v[i].assign(v.begin(), v.end());
  }
  std::istringstream rng_state(t.at("rng").get<std::string>());
  rng_state >> rng_;
  frozen_ = t.at("predictor_frozen").get<bool>();
  threshold_.reset();
  if (!t.at("freeze_threshold").is_null()) threshold_ = t.at("freeze_threshold").get<double>();
  step_log_.clear();
  for (const auto& s : t.at("steps")) step_log_.push_back(LossBreakdown::from_json(s));
  history_.clear();
  for (const auto& e : t.at("epochs")) history_.push_back(EpochLog::from_json(e));
}

// ---- classifier pre-training ---------------------------------------------------

PretrainResult pretrain_classifier(ClassifierBundle& c, const std::vector<Sample>& train,
                                   const std::vector<Sample>& dev, const PretrainConfig& config) {
  if (train.empty() || dev.empty()) throw ContractError("pretrain: empty split");
  if (config.batch_size == 0 || config.max_epochs == 0)
    throw ValidationError("pretrain: batch size and epochs must be positive");
  ParameterList params = c.parameters();
  for (auto& p : params) p.tensor.node()->requires_grad = true;
  Adam adam(params, config.learning_rate);
  Rng rng(config.seed);
  PretrainResult result;
  auto best = snapshot(params);
  double best_acc = -1.0;
  std::size_t since_best = 0;
  std::vector<Sample> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      batch.clear();
      for (std::size_t k = begin; k < std::min(begin + config.batch_size, order.size()); ++k)
        batch.push_back(train[order[k]]);
      std::vector<int> labels;
      for (const auto& s : batch) labels.push_back(s.label);
      Tape tape;
      const Tensor loss = cross_entropy(c.golden_logits(batch), labels);
      if (!std::isfinite(loss.item()))
        throw DivergenceError("classifier pre-training diverged at epoch " +
                              std::to_string(epoch));
      tape.backward(loss);
      adam.step();
      adam.zero_grad();
      total += loss.item();
      ++steps;
    }
    const double acc = classifier_accuracy(c, dev).top1;
    result.log.push_back({{"epoch", epoch},
                          {"loss", total / static_cast<double>(steps)},
                          {"dev_acc", acc}});
    if (acc > best_acc) {
      best_acc = acc;
      best = snapshot(params);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  restore(params, best);
  nn::freeze(params);
  result.best_dev_acc = best_acc;
  c.oracle["dev_acc"] = best_acc;
  return result;
}

}  // namespace gef
