#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gef/framework/evaluate.hpp"
#include "gef/framework/trainer.hpp"
#include "gef/text/synth.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace gef;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string config_path;
  bool quiet = false;
};

Globals g;

void note(const std::string& line) {
  if (!g.quiet) std::cerr << line << '\n';
}

cli::RunConfig run_config(text::Schema schema) {
  cli::RunConfig c = cli::RunConfig::defaults(schema);
  if (!g.config_path.empty()) cli::ConfigFile::load(g.config_path).apply(c);
  c.seed = g.seed;
  c.pretrain.seed = g.seed;
  c.train.seed = g.seed;
  return c;
}

struct Corpus {
  std::vector<Sample> train, dev, test;
  text::Vocab vocab;
};

template <typename Example>
std::vector<Example> read_corpus(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("corpus not found: " + path.string());
  auto loaded = text::load_jsonl<Example>(path);
  for (const auto& d : loaded.diagnostics)
    std::cerr << path.string() << ":" << d.line << ": skipped: " << d.message << '\n';
  if (loaded.examples.empty()) throw ValidationError("no valid examples in " + path.string());
  return loaded.examples;
}

template <typename Example>
Corpus split_corpus(const fs::path& path, std::uint64_t split_seed, int min_freq,
                    const text::Vocab* vocab) {
  const auto split = text::filter_and_split(read_corpus<Example>(path), split_seed);
  Corpus c;
  c.vocab = vocab ? *vocab : build_vocab(split.train, min_freq);
  c.train = encode_samples(split.train, c.vocab);
  c.dev = encode_samples(split.dev, c.vocab);
  c.test = encode_samples(split.test, c.vocab);
  return c;
}

Corpus load_split(text::Schema schema, const fs::path& path, std::uint64_t split_seed, int min_freq,
                  const text::Vocab* vocab = nullptr) {
  return schema == text::Schema::kSkytrax
             ? split_corpus<text::SkytraxExample>(path, split_seed, min_freq, vocab)
             : split_corpus<text::PCMagExample>(path, split_seed, min_freq, vocab);
}

std::uint64_t split_seed_of(const ClassifierBundle& c, std::uint64_t fallback) {
  return c.data.contains("split_seed") ? c.data.at("split_seed").get<std::uint64_t>() : fallback;
}

void print_json_line(std::ostream& out, const nlohmann::json& j) { out << j.dump() << '\n'; }

// ---- commands -------------------------------------------------------------------

struct SynthArgs {
  std::string schema, out;
  std::size_t n = 0;
};

int cmd_synth(const SynthArgs& a) {
  const auto schema = text::parse_schema(a.schema);
  const std::size_t n = a.n ? a.n : (schema == text::Schema::kSkytrax ? 20000 : 4000);
  if (schema == text::Schema::kSkytrax) {
    text::write_jsonl(a.out, text::synth_numeric(n, g.seed));
  } else {
    text::write_jsonl(a.out, text::synth_text(n, g.seed));
  }
  note("wrote " + std::to_string(n) + " " + a.schema + " examples to " + a.out);
  return 0;
}

struct PretrainArgs {
  std::string corpus, schema, out;
};

int cmd_pretrain(const PretrainArgs& a) {
  const auto schema = text::parse_schema(a.schema);
  const auto cfg = run_config(schema);
  Corpus corpus = load_split(schema, a.corpus, cfg.split_seed, cfg.min_freq);
  note("train " + std::to_string(corpus.train.size()) + ", dev " +
       std::to_string(corpus.dev.size()) + ", test " + std::to_string(corpus.test.size()) +
       ", vocab " + std::to_string(corpus.vocab.size()));
  if (corpus.dev.empty() || corpus.test.empty())
    throw ValidationError("corpus too small for a dev/test split");
  auto c = ClassifierBundle::create(schema, corpus.vocab, cfg.classifier, cfg.seed);
  const auto result = pretrain_classifier(c, corpus.train, corpus.dev, cfg.pretrain);
  for (const auto& line : result.log) note(line.dump());
  const auto dev = classifier_accuracy(c, corpus.dev);
  const auto test = classifier_accuracy(c, corpus.test);
  c.oracle = {{"dev_acc", dev.top1}, {"dev_top3", dev.top3}, {"test_acc", test.top1},
              {"test_top3", test.top3}, {"best_epoch", result.best_epoch}};
  c.data = {{"split_seed", cfg.split_seed}, {"min_freq", cfg.min_freq}};
  c.save(a.out);

  char buf[128];
  std::printf("%-12s %8s %10s\n", "", "Acc%", "Top-3 Acc%");
  std::snprintf(buf, sizeof buf, "%-12s %8.2f %10.2f\n", "oracle dev", dev.top1, dev.top3);
  std::fputs(buf, stdout);
  std::snprintf(buf, sizeof buf, "%-12s %8.2f %10.2f\n", "oracle test", test.top1, test.top3);
  std::fputs(buf, stdout);
  return 0;
}

struct TrainArgs {
  std::string corpus, classifier, mode = "gef", out, log, checkpoint_dir, resume, schema;
  std::optional<std::size_t> epochs, max_steps, batch_size;
  std::optional<double> lr;
  std::optional<std::string> gradient_mode, encoder;
};

int cmd_train(const TrainArgs& a) {
  if (a.mode != "gef" && a.mode != "baseline")
    throw ValidationError("--mode must be baseline or gef");
  if (a.mode == "gef" && a.classifier.empty())
    throw ValidationError("gef mode needs a frozen classifier (--classifier)");

  std::optional<ClassifierBundle> c;
  if (!a.classifier.empty()) c = ClassifierBundle::load(a.classifier);
  if (!c && a.schema.empty()) throw ValidationError("--schema is required without --classifier");
  const auto schema = c ? c->schema : text::parse_schema(a.schema);
  if (c && !a.schema.empty() && text::parse_schema(a.schema) != schema)
    throw ValidationError("--schema disagrees with the classifier checkpoint");

  auto cfg = run_config(schema);
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.max_steps) cfg.train.max_steps = *a.max_steps;
  if (a.batch_size) cfg.train.batch_size = *a.batch_size;
  if (a.lr) cfg.train.learning_rate = *a.lr;
  if (a.gradient_mode) cfg.train.gradient_mode = parse_gradient_mode(*a.gradient_mode);
  if (a.encoder) cfg.model.encoder.kind = nn::parse_encoder_kind(*a.encoder);
  if (a.mode == "baseline") cfg.train.weights = {1.0, 0.0};

  const std::uint64_t split_seed = c ? split_seed_of(*c, cfg.split_seed) : cfg.split_seed;
  Corpus corpus = load_split(schema, a.corpus, split_seed, cfg.min_freq, c ? &c->vocab : nullptr);
  if (!c) {
    c = ClassifierBundle::create(schema, corpus.vocab, cfg.classifier, cfg.seed);
    c->data = {{"split_seed", split_seed}, {"min_freq", cfg.min_freq}};
  }
  ModelBundle model = ModelBundle::create(cfg.model, std::move(*c), cfg.seed);
  Trainer trainer(model, cfg.train);
  if (!a.resume.empty()) {
    trainer.load_state(a.resume);
    note("resumed after epoch " + std::to_string(trainer.epochs_completed()));
  }

  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log, trainer.epochs_completed() > 0 ? std::ios::app : std::ios::trunc);
    if (!log_file) throw ValidationError("cannot open log file " + a.log);
  }
  if (!a.checkpoint_dir.empty()) fs::create_directories(a.checkpoint_dir);
  trainer.fit(corpus.train, corpus.dev, [&](const EpochLog& e) {
    const auto j = e.to_json();
    print_json_line(std::cout, j);
    if (log_file.is_open()) print_json_line(log_file, j);
    if (!a.checkpoint_dir.empty())
      trainer.save_state(fs::path(a.checkpoint_dir) / ("epoch-" + std::to_string(e.epoch) + ".ckpt"));
  });
  trainer.save_state(a.out);
  note("saved " + a.out);
  return 0;
}

struct EvalArgs {
  std::string checkpoint, corpus, split = "test", json;
};

int cmd_eval(const EvalArgs& a) {
  const ModelBundle model = ModelBundle::load(a.checkpoint);
  const auto cfg = run_config(model.config.schema);
  const Corpus corpus = load_split(model.config.schema, a.corpus,
                                   split_seed_of(model.classifier, cfg.split_seed), cfg.min_freq,
                                   &model.vocab);
  const std::vector<Sample>* samples = nullptr;
  if (a.split == "train") samples = &corpus.train;
  else if (a.split == "dev") samples = &corpus.dev;
  else if (a.split == "test") samples = &corpus.test;
  else throw ValidationError("--split must be train, dev or test");
  const EvalReport report = evaluate(model, *samples);
  std::cout << format_report(report);
  if (!a.json.empty()) {
    std::ofstream out(a.json, std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + a.json);
    out << report.to_json().dump(2) << '\n';
  }
  return 0;
}

struct ExplainArgs {
  std::string checkpoint, input, out;
};

template <typename Example>
void explain_examples(const ModelBundle& model, const fs::path& input, std::ostream& out) {
  const auto examples = read_corpus<Example>(input);
  const auto samples = encode_samples(examples, model.vocab);
  const auto preds = predict(model, samples);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    Example generated = examples[i];
    nlohmann::json gold = text::to_json(examples[i]);
    gold.erase("review");
    if constexpr (std::is_same_v<Example, text::SkytraxExample>) {
      generated.subscores = preds[i].subscores;
      generated.overall = preds[i].label + 1;
    } else {
      for (std::size_t p = 0; p < text::kNumPolarities; ++p)
        generated.comments[p] = model.vocab.decode(preds[i].comments[p]);
      generated.overall = text::pcmag_overall(preds[i].label);
    }
    nlohmann::json j = text::to_json(generated);
    j["gold"] = gold;
    print_json_line(out, j);
  }
}

int cmd_explain(const ExplainArgs& a) {
  const ModelBundle model = ModelBundle::load(a.checkpoint);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw ValidationError("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  if (model.is_numeric()) {
    explain_examples<text::SkytraxExample>(model, a.input, out);
  } else {
    explain_examples<text::PCMagExample>(model, a.input, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative explanation framework: synthesize corpora, train and evaluate"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--config", g.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic corpus as JSONL");
  s->add_option("--schema", synth.schema, "pcmag | skytrax")->required();
  s->add_option("--n", synth.n, "Number of examples (default 20000 skytrax, 4000 pcmag)");
  s->add_option("--out", synth.out, "Output path")->required();

  PretrainArgs pre;
  auto* p = app.add_subcommand("pretrain-c", "Train and freeze the explanation classifier");
  p->add_option("--corpus", pre.corpus, "JSONL corpus")->required();
  p->add_option("--schema", pre.schema, "pcmag | skytrax")->required();
  p->add_option("--out", pre.out, "Classifier checkpoint path")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a baseline or GEF model");
  t->add_option("--corpus", tr.corpus, "JSONL corpus")->required();
  t->add_option("--classifier", tr.classifier, "Frozen classifier checkpoint");
  t->add_option("--mode", tr.mode, "baseline | gef")->capture_default_str();
  t->add_option("--schema", tr.schema, "pcmag | skytrax (without --classifier)");
  t->add_option("--out", tr.out, "Final checkpoint path")->required();
  t->add_option("--log", tr.log, "Epoch log (JSONL)");
  t->add_option("--checkpoint-dir", tr.checkpoint_dir, "Directory for per-epoch checkpoints");
  t->add_option("--resume", tr.resume, "Checkpoint to resume from");
  t->add_option("--epochs", tr.epochs, "Epoch count");
  t->add_option("--max-steps", tr.max_steps, "Cap on optimizer steps");
  t->add_option("--batch-size", tr.batch_size, "Batch size");
  t->add_option("--lr", tr.lr, "Learning rate");
  t->add_option("--gradient-mode", tr.gradient_mode, "soft | stop-gradient");
  t->add_option("--encoder", tr.encoder, "bow | gru | lstm | cnn");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus split");
  e->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  e->add_option("--corpus", ev.corpus, "JSONL corpus")->required();
  e->add_option("--split", ev.split, "train | dev | test")->capture_default_str();
  e->add_option("--json", ev.json, "Also write the report as JSON");

  ExplainArgs ex;
  auto* x = app.add_subcommand("explain", "Emit predictions with generated explanations");
  x->add_option("--checkpoint", ex.checkpoint, "Model checkpoint")->required();
  x->add_option("--input", ex.input, "JSONL examples")->required();
  x->add_option("--out", ex.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*p) return cmd_pretrain(pre);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*x) return cmd_explain(ex);
  } catch (const DivergenceError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
