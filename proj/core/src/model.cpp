#include "gef/framework/model.hpp"

namespace gef {

using text::Schema;

nlohmann::json vocab_to_json(const text::Vocab& vocab) {
  return {{"min_freq", vocab.min_freq()}, {"tokens", vocab.tokens()}};
}

text::Vocab vocab_from_json(const nlohmann::json& j) {
  return text::Vocab::from_tokens(j.at("tokens").get<std::vector<std::string>>(),
                                  j.at("min_freq").get<int>());
}

// ---- classifier -----------------------------------------------------------------

ClassifierBundle ClassifierBundle::create(Schema schema, text::Vocab vocab,
                                          nn::ClassifierConfig config, std::uint64_t seed) {
  ClassifierBundle c;
  c.schema = schema;
  c.vocab = std::move(vocab);
  config.num_classes = text::num_classes(schema);
  if (schema == Schema::kPCMag) config.vocab_size = c.vocab.size();
  c.config = config;
  Rng rng(seed);
  if (c.is_numeric()) {
    c.numeric = nn::NumericClassifier(config, rng);
  } else {
    c.text = nn::TextClassifier(config, rng);
  }
  return c;
}

Tensor ClassifierBundle::golden_logits(std::span<const Sample> batch) const {
  if (is_numeric()) {
    std::vector<nn::Subscores> scores;
    scores.reserve(batch.size());
    for (const auto& s : batch) scores.push_back(s.subscores);
    return numeric.logits(scores);
  }
  std::vector<nn::CommentTriple> triples;
  triples.reserve(batch.size());
  for (const auto& s : batch) triples.push_back(s.comments);
  return text.logits(triples);
}

ParameterList ClassifierBundle::parameters() const {
  ParameterList out;
  if (is_numeric()) {
    numeric.collect("classifier", out);
  } else {
    text.collect("classifier", out);
  }
  return out;
}

nlohmann::json ClassifierBundle::manifest() const {
  return {{"schema", text::to_string(schema)},
          {"config", config.to_json()},
          {"vocab", vocab_to_json(vocab)},
          {"oracle", oracle},
          {"data", data}};
}

void ClassifierBundle::save(const std::filesystem::path& path) const {
  nlohmann::json m = {{"kind", "classifier"}, {"classifier", manifest()}};
  save_checkpoint(path, m, parameters());
}

ClassifierBundle ClassifierBundle::from_checkpoint(const nlohmann::json& manifest,
                                                   const Checkpoint& ckpt,
                                                   const std::string& prefix) {
  ClassifierBundle c;
  c.schema = text::parse_schema(manifest.at("schema").get<std::string>());
  c.vocab = vocab_from_json(manifest.at("vocab"));
  c.config = nn::ClassifierConfig::from_json(manifest.at("config"));
  c.oracle = manifest.value("oracle", nlohmann::json::object());
  c.data = manifest.value("data", nlohmann::json::object());
  Rng rng(0);
  if (c.is_numeric()) {
    c.numeric = nn::NumericClassifier(c.config, rng);
  } else {
    c.text = nn::TextClassifier(c.config, rng);
  }
  ParameterList params = c.parameters();
  for (auto& p : params) {
    const std::string stored = prefix + p.name.substr(std::string("classifier").size());
    const Tensor& src = ckpt.get(stored);
    if (src.shape() != p.tensor.shape())
      throw ValidationError("checkpoint tensor '" + stored + "' has shape " +
                            shape_str(src.shape()) + ", expected " + shape_str(p.tensor.shape()));
    std::copy(src.values().begin(), src.values().end(), p.tensor.mutable_values().begin());
  }
  nn::freeze(params);
  return c;
}

ClassifierBundle ClassifierBundle::load(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (!ckpt.manifest.contains("classifier"))
    throw ValidationError(path.string() + " does not contain a classifier");
  return from_checkpoint(ckpt.manifest.at("classifier"), ckpt, "classifier");
}

// ---- model ----------------------------------------------------------------------

ModelConfig ModelConfig::defaults(Schema schema) {
  ModelConfig c;
  c.schema = schema;
  c.encoder.kind = nn::EncoderKind::kLstm;
  c.encoder.embedding_dim = 100;
  c.encoder.hidden_dim = schema == Schema::kPCMag ? 128 : 256;
  return c;
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j = {{"schema", text::to_string(schema)}, {"encoder", encoder.to_json()}};
  if (schema == Schema::kPCMag) j["cvae"] = cvae.to_json();
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.schema = text::parse_schema(j.at("schema").get<std::string>());
  c.encoder = nn::EncoderConfig::from_json(j.at("encoder"));
  if (j.contains("cvae")) c.cvae = nn::CvaeConfig::from_json(j.at("cvae"));
  return c;
}

ModelBundle ModelBundle::create(ModelConfig config, ClassifierBundle classifier,
                                std::uint64_t seed) {
  if (classifier.schema != config.schema)
    throw ValidationError("classifier schema " + text::to_string(classifier.schema) +
                          " does not match model schema " + text::to_string(config.schema));
  ModelBundle m;
  m.vocab = classifier.vocab;
  config.encoder.vocab_size = m.vocab.size();
  if (config.schema == Schema::kPCMag) {
    config.cvae.vocab_size = m.vocab.size();
    config.cvae.condition_dim = config.encoder.hidden_dim;
  }
  m.config = config;
  Rng rng(seed);
  m.encoder = nn::Encoder(config.encoder, rng);
  m.predictor = nn::Predictor(config.encoder.hidden_dim, m.num_classes(), rng);
  if (m.is_numeric()) {
    m.numeric_generator = nn::NumericGenerator(config.encoder.hidden_dim, rng);
  } else {
    m.cvae = nn::Cvae(config.cvae, rng);
  }
  m.classifier = std::move(classifier);
  nn::freeze(m.classifier.parameters());
  return m;
}

Tensor ModelBundle::encode(std::span<const Sample> batch) const {
  std::vector<Ids> reviews;
  reviews.reserve(batch.size());
  for (const auto& s : batch) reviews.push_back(s.review);
  return encoder.encode(reviews);
}

ParameterList ModelBundle::encoder_parameters() const {
  ParameterList out;
  encoder.collect("encoder", out);
  return out;
}

ParameterList ModelBundle::predictor_parameters() const {
  ParameterList out;
  predictor.collect("predictor", out);
  return out;
}

ParameterList ModelBundle::generator_parameters() const {
  ParameterList out;
  if (is_numeric()) {
    numeric_generator.collect("generator", out);
  } else {
    cvae.collect("generator", out);
  }
  return out;
}

ParameterList ModelBundle::trainable_parameters() const {
  ParameterList out = encoder_parameters();
  for (auto& p : predictor_parameters()) out.push_back(std::move(p));
  for (auto& p : generator_parameters()) out.push_back(std::move(p));
  return out;
}

ParameterList ModelBundle::all_parameters() const {
  ParameterList out = trainable_parameters();
  for (auto& p : classifier.parameters()) out.push_back(std::move(p));
  return out;
}

nlohmann::json ModelBundle::manifest() const {
  return {{"kind", "model"},
          {"model", config.to_json()},
          {"vocab", vocab_to_json(vocab)},
          {"classifier", classifier.manifest()}};
}

void ModelBundle::save(const std::filesystem::path& path, const nlohmann::json& extra) const {
  nlohmann::json m = manifest();
  if (!extra.is_null()) m["extra"] = extra;
  save_checkpoint(path, m, all_parameters());
}

ModelBundle ModelBundle::from_checkpoint(const Checkpoint& ckpt) {
  const auto& m = ckpt.manifest;
  if (m.value("kind", "") != "model") throw ValidationError("checkpoint does not hold a model");
  ClassifierBundle c = ClassifierBundle::from_checkpoint(m.at("classifier"), ckpt, "classifier");
  ModelConfig config = ModelConfig::from_json(m.at("model"));
  ModelBundle b = create(config, std::move(c), 0);
  restore_parameters(ckpt, b.trainable_parameters());
  return b;
}

ModelBundle ModelBundle::load(const std::filesystem::path& path) {
  return from_checkpoint(load_checkpoint(path));
}

}  // namespace gef
