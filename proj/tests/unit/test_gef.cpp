#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "bundles.hpp"
#include "gef/framework/evaluate.hpp"
#include "gef/framework/gef.hpp"
#include "gef/framework/trainer.hpp"

using namespace gef;
using gef::testing::numeric_setup;
using gef::testing::text_setup;

namespace {

// Second implementation of the objective arithmetic, written out longhand.
double oracle_ef(double pred, double cls, double gold) {
  const double a = cls >= gold ? cls - gold : gold - cls;
  const double b = cls >= pred ? cls - pred : pred - cls;
  return a + b;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gef_test_" + name);
}

TrainConfig small_config(std::size_t epochs = 1) {
  TrainConfig c;
  c.batch_size = 16;
  c.learning_rate = 0.01;
  c.epochs = epochs;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("ground-truth probability lookup") {
  const std::vector<double> p = {0.1, 0.7, 0.2};
  CHECK(extract_gold_prob(p, 1) == 0.7);
  const std::vector<double> uniform(4, 0.25);
  for (int y = 0; y < 4; ++y) CHECK(extract_gold_prob(uniform, y) == 0.25);
  const std::vector<double> onehot = {0.0, 0.0, 1.0};
  CHECK(extract_gold_prob(onehot, 2) == 1.0);
  CHECK_THROWS_AS(extract_gold_prob(p, 3), IndexError);
  CHECK_THROWS_AS(extract_gold_prob(p, -1), IndexError);

  const Tensor probs = Tensor::from({2, 3}, {0.1, 0.7, 0.2, 0.5, 0.25, 0.25});
  const std::vector<int> labels = {1, 0};
  const Tensor col = extract_gold_prob(probs, labels);
  CHECK(col.at(0, 0) == 0.7);
  CHECK(col.at(1, 0) == 0.5);
}

TEST_CASE("explanation factor, mrt and final loss examples") {
  CHECK(explanation_factor({0.3, 0.6, 0.9}) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(explanation_factor({0.4, 0.4, 0.4}) == 0.0);

  const std::vector<double> L = {2.0};
  const std::vector<double> zero = {0.0};
  const std::vector<double> half = {0.5};
  CHECK(mrt_loss(L, zero) == 0.0);
  CHECK(mrt_loss(L, half) == 1.0);
  CHECK(final_loss(3.0, 0.0) == 3.0);
  CHECK(final_loss(1.0, mrt_loss(std::vector<double>{1.0}, std::vector<double>{0.6})) ==
        doctest::Approx(1.6).epsilon(1e-15));
  CHECK(final_loss(2.5, 7.0, {1.0, 0.0}) == 2.5);

  const std::vector<double> losses = {1.5, 0.25, 3.0};
  const std::vector<double> factors = {0.2, 1.9, 0.0};
  const double expected = (1.5 * 0.2 + 0.25 * 1.9 + 3.0 * 0.0) / 3.0;
  CHECK(mrt_loss(losses, factors) == expected);
  const Tensor tl = Tensor::from({3, 1}, losses);
  const Tensor tf = Tensor::from({3, 1}, factors);
  CHECK(std::abs(mrt_loss(tl, tf).item() - expected) <= 1e-15);

  CHECK_THROWS_AS(mrt_loss(losses, std::vector<double>{1.0}), DimensionError);
  CHECK_THROWS_AS(mrt_loss(std::vector<double>{}, std::vector<double>{}), ContractError);
}

TEST_CASE("objective arithmetic matches an independent recomputation on random triples") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> prob(1e-9, 1.0 - 1e-9), loss(0.0, 20.0), w(0.0, 2.0);
  std::vector<double> ls, efs;
  for (int i = 0; i < 10000; ++i) {
    const ProbTriple t{prob(rng), prob(rng), prob(rng)};
    const double ef = explanation_factor(t);
    CHECK(ef == oracle_ef(t.p_pred, t.p_classified, t.p_gold));
    CHECK(ef >= 0.0);
    CHECK(ef < 2.0);
    const double l = loss(rng);
    ls.push_back(l);
    efs.push_back(ef);
    const LossWeights weights{w(rng), w(rng)};
    const double mrt = mrt_loss(std::span<const double>(&l, 1), std::span<const double>(&ef, 1));
    CHECK(mrt == l * ef);
    CHECK(final_loss(l, mrt, weights) == weights.loss * l + weights.mrt * mrt);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < ls.size(); ++i) total += ls[i] * efs[i];
  CHECK(mrt_loss(ls, efs) == total / 10000.0);
}

TEST_CASE("tensor forms agree with the scalar forms") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<double> pred(50), cls(50), gold(50), ls(50);
  for (std::size_t i = 0; i < 50; ++i) {
    pred[i] = u(rng);
    cls[i] = u(rng);
    gold[i] = u(rng);
    ls[i] = 10.0 * u(rng);
  }
  const Tensor ef = explanation_factor(Tensor::from({50, 1}, pred), Tensor::from({50, 1}, cls),
                                       Tensor::from({50, 1}, gold));
  std::vector<double> efs;
  for (std::size_t i = 0; i < 50; ++i) {
    efs.push_back(explanation_factor({pred[i], cls[i], gold[i]}));
    CHECK(ef.at(i, 0) == efs.back());
  }
  const Tensor mrt = mrt_loss(Tensor::from({50, 1}, ls), ef);
  CHECK(std::abs(mrt.item() - mrt_loss(ls, efs)) <= 1e-14);
  const Tensor fin = final_loss(Tensor::scalar(1.25), mrt, {1.0, 1.0});
  CHECK(fin.item() == 1.25 + mrt.item());
}

TEST_CASE("stop-gradient weighting: each row's loss is scaled by (1 + EF_i) / n") {
  const Tensor rows = Tensor::from({3, 1}, {1.0, 2.0, 0.5}, true);
  const Tensor ef = Tensor::from({3, 1}, {0.2, 0.0, 1.5});
  {
    Tape tape;
    tape.backward(final_loss(mean(rows), mrt_loss(rows, detach(ef))));
  }
  const auto g = rows.grad();
  CHECK(g[0] == doctest::Approx(1.2 / 3.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(2.5 / 3.0).epsilon(1e-15));
}

TEST_CASE("joint loss at initialization is ln 10 + 5 ln 6") {
  auto s = numeric_setup();
  Trainer trainer(s.model, small_config(), Objective::kBaseline);
  const auto b = trainer.step(std::span<const Sample>(s.samples.data(), 16));
  CHECK(b.L_p == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(b.L_e == doctest::Approx(5.0 * std::log(6.0)).epsilon(1e-12));
  CHECK(b.L == b.L_p + b.L_e);
  CHECK(b.L_final == b.L);
  CHECK(b.EF == 0.0);

  auto s2 = numeric_setup();
  auto cfg = small_config();
  cfg.explanation_loss = false;
  Trainer no_le(s2.model, cfg);
  const auto b2 = no_le.step(std::span<const Sample>(s2.samples.data(), 16));
  CHECK(b2.L_e == 0.0);
  CHECK(b2.L == b2.L_p);
}

TEST_CASE("logged losses satisfy the breakdown identities") {
  for (auto mode : {GradientMode::kSoft, GradientMode::kStopGradient}) {
    auto s = numeric_setup(96, 3);
    auto cfg = small_config(2);
    cfg.gradient_mode = mode;
    Trainer trainer(s.model, cfg);
    trainer.fit(s.samples, {});
    REQUIRE(trainer.step_log().size() == 12);
    for (const auto& b : trainer.step_log()) {
      CHECK(b.L == b.L_p + b.L_e);
      CHECK(b.L_final == b.L + b.L_MRT);
      CHECK(b.L_p >= 0.0);
      CHECK(b.L_e >= 0.0);
      CHECK(b.EF >= 0.0);
      CHECK(b.EF < 2.0);
      CHECK(b.L_MRT >= 0.0);
    }
  }
}

TEST_CASE("weights (1, 0) reproduce the baseline objective step for step") {
  for (auto mode : {GradientMode::kSoft, GradientMode::kStopGradient}) {
    auto a = numeric_setup(80, 5);
    auto b = numeric_setup(80, 5);
    auto cfg = small_config(3);
    cfg.gradient_mode = mode;
    cfg.weights = {1.0, 0.0};
    Trainer gef_trainer(a.model, cfg, Objective::kGef);
    Trainer base_trainer(b.model, cfg, Objective::kBaseline);
    gef_trainer.fit(a.samples, {});
    base_trainer.fit(b.samples, {});
    REQUIRE(gef_trainer.step_log().size() == base_trainer.step_log().size());
    for (std::size_t i = 0; i < gef_trainer.step_log().size(); ++i) {
      CHECK(std::abs(gef_trainer.step_log()[i].L_final - base_trainer.step_log()[i].L_final) <=
            1e-12);
    }
    CHECK(parameter_digest(a.model.trainable_parameters()) ==
          parameter_digest(b.model.trainable_parameters()));
  }
}

TEST_CASE("the frozen classifier is untouched by training") {
  auto s = numeric_setup(64, 6);
  const auto before = parameter_digest(s.model.classifier.parameters());
  Trainer trainer(s.model, small_config(2));
  trainer.fit(s.samples, s.samples);
  CHECK(parameter_digest(s.model.classifier.parameters()) == before);

  auto t = text_setup(24, 6);
  const auto tbefore = parameter_digest(t.model.classifier.parameters());
  auto cfg = TrainConfig::defaults(text::Schema::kPCMag);
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.gradient_mode = GradientMode::kSoft;
  Trainer ttrainer(t.model, cfg);
  ttrainer.fit(t.samples, {});
  CHECK(parameter_digest(t.model.classifier.parameters()) == tbefore);
}

TEST_CASE("predictor freeze is monotone and stops predictor updates") {
  auto t = text_setup(48, 7);
  auto cfg = TrainConfig::defaults(text::Schema::kPCMag);
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.gradient_mode == GradientMode::kStopGradient);
  cfg.batch_size = 16;
  cfg.epochs = 3;
  cfg.freeze_threshold = 100.0;
  Trainer trainer(t.model, cfg);
  trainer.step(std::span<const Sample>(t.samples.data(), 16));
  CHECK_FALSE(trainer.predictor_frozen());
  const auto pred_before = parameter_digest(t.model.predictor_parameters());
  const auto enc_before = parameter_digest(t.model.encoder_parameters());
  trainer.fit(t.samples, t.samples);
  CHECK(trainer.predictor_frozen());
  bool seen = false;
  for (const auto& e : trainer.history()) {
    if (seen) CHECK(e.predictor_frozen);
    seen = seen || e.predictor_frozen;
  }
  // The first fitted step ran before the running mean crossed the threshold.
  CHECK(parameter_digest(t.model.predictor_parameters()) != pred_before);
  const auto pred_frozen = parameter_digest(t.model.predictor_parameters());
  CHECK(parameter_digest(t.model.encoder_parameters()) != enc_before);
  trainer.step(std::span<const Sample>(t.samples.data(), 16));
  CHECK(parameter_digest(t.model.predictor_parameters()) == pred_frozen);
}

TEST_CASE("freeze threshold comes from the first dev minimum") {
  auto t = text_setup(40, 8);
  auto cfg = TrainConfig::defaults(text::Schema::kPCMag);
  cfg.batch_size = 8;
  cfg.epochs = 6;
  cfg.learning_rate = 0.05;
  Trainer trainer(t.model, cfg);
  const std::vector<Sample> train(t.samples.begin(), t.samples.begin() + 32);
  const std::vector<Sample> dev(t.samples.begin() + 32, t.samples.end());
  trainer.fit(train, dev);
  const auto& h = trainer.history();
  std::optional<double> expected;
  for (std::size_t i = 1; i < h.size() && !expected; ++i)
    if (h[i].dev_L_p > h[i - 1].dev_L_p) expected = 1.05 * h[i - 1].dev_L_p;
  REQUIRE(expected.has_value() == trainer.freeze_threshold().has_value());
  if (expected) CHECK(*trainer.freeze_threshold() == *expected);
}

TEST_CASE("resuming from a saved state reproduces later steps bitwise") {
  auto cfg = small_config(2);
  auto full = numeric_setup(64, 9);
  Trainer straight(full.model, cfg);
  straight.fit(full.samples, full.samples);

  auto first = numeric_setup(64, 9);
  auto cfg1 = cfg;
  cfg1.epochs = 1;
  Trainer part(first.model, cfg1);
  part.fit(first.samples, first.samples);
  const auto path = temp_path("resume.ckpt");
  part.save_state(path);

  auto second = numeric_setup(64, 9);
  Trainer resumed(second.model, cfg);
  resumed.load_state(path);
  CHECK(resumed.epochs_completed() == 1);
  resumed.fit(second.samples, second.samples);

  REQUIRE(resumed.step_log().size() == straight.step_log().size());
  for (std::size_t i = 0; i < straight.step_log().size(); ++i)
    CHECK(resumed.step_log()[i].to_json() == straight.step_log()[i].to_json());
  CHECK(parameter_digest(second.model.all_parameters()) ==
        parameter_digest(full.model.all_parameters()));
  CHECK(resumed.history().back().to_json() == straight.history().back().to_json());
}

TEST_CASE("non-finite losses abort with a divergence error") {
  auto s = numeric_setup();
  auto params = s.model.encoder_parameters();
  const auto row = static_cast<std::size_t>(s.samples[0].review[0]);
  params[0].tensor.mutable_values()[row * params[0].tensor.cols()] = std::nan("");
  Trainer trainer(s.model, small_config());
  CHECK_THROWS_AS(trainer.fit(s.samples, {}), DivergenceError);
}

TEST_CASE("train config validation and serialization") {
  TrainConfig c = TrainConfig::defaults(text::Schema::kSkytrax);
  CHECK(c.batch_size == 64);
  CHECK(c.gradient_mode == GradientMode::kSoft);
  CHECK(c.weights.loss == 1.0);
  CHECK(c.weights.mrt == 1.0);
  c.freeze_threshold = 0.5;
  const auto back = TrainConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  auto bad = c;
  bad.freeze_threshold = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.weights = {0.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(parse_gradient_mode("stop") == GradientMode::kStopGradient);
  CHECK_THROWS_AS(parse_gradient_mode("hard"), ValidationError);
}

TEST_CASE("classifier pre-training freezes C and records the dev accuracy") {
  const auto corpus = text::synth_numeric(600, 10);
  const auto split = text::filter_and_split(corpus, 10);
  const auto vocab = build_vocab(split.train);
  const auto train = encode_samples(split.train, vocab);
  const auto dev = encode_samples(split.dev, vocab);
  nn::ClassifierConfig cc;
  cc.embedding_dim = 8;
  cc.hidden_dim = 32;
  auto c = ClassifierBundle::create(text::Schema::kSkytrax, vocab, cc, 3);
  PretrainConfig pc;
  pc.learning_rate = 0.01;
  pc.max_epochs = 15;
  const auto result = pretrain_classifier(c, train, dev, pc);
  for (const auto& p : c.parameters()) CHECK_FALSE(p.tensor.requires_grad());
  CHECK(c.oracle["dev_acc"] == result.best_dev_acc);
  CHECK(classifier_accuracy(c, dev).top1 == result.best_dev_acc);
  CHECK(result.best_dev_acc > 50.0);
  CHECK(result.log.size() <= 15);
}

TEST_CASE("evaluation reports") {
  auto s = numeric_setup(40, 12);
  const auto report = evaluate(s.model, s.samples);
  CHECK(report.examples == 40);
  CHECK(report.accuracy.top3 >= report.accuracy.top1);
  REQUIRE(report.accuracy.fields.has_value());
  CHECK_FALSE(report.bleu.has_value());
  const auto j = report.to_json();
  for (const char* code : {"s", "c", "f", "i", "t"}) CHECK(j["accuracy"]["fields"].contains(code));
  CHECK(format_report(report).find("Top-3 Acc%") != std::string::npos);

  auto t = text_setup(16, 12);
  const auto tr = evaluate(t.model, t.samples);
  REQUIRE(tr.bleu.has_value());
  for (double b : tr.bleu->all) {
    CHECK(b >= 0.0);
    CHECK(b <= 100.0);
  }

  // Golden comments as predictions score BLEU 100 once unknown tokens are
  // dropped (an unknown reference token never matches).
  auto golden = t.samples;
  for (auto& g : golden)
    for (auto& c : g.comments) std::erase(c, text::Vocab::kUnk);
  auto preds = predict(t.model, golden);
  for (std::size_t i = 0; i < preds.size(); ++i) preds[i].comments = golden[i].comments;
  const auto perfect = comment_bleu(preds, golden);
  CHECK(perfect.all[0] == doctest::Approx(100.0));
  CHECK(perfect.pos[3] == doctest::Approx(100.0));
}
