#include "run_config.hpp"

#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

namespace gef::cli {

namespace pt = boost::property_tree;

RunConfig RunConfig::defaults(text::Schema schema) {
  RunConfig c;
  c.schema = schema;
  c.model = ModelConfig::defaults(schema);
  c.train = TrainConfig::defaults(schema);
  if (schema == text::Schema::kPCMag) c.pretrain.batch_size = 32;
  return c;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  ConfigFile f;
  try {
    pt::read_ini(path.string(), f.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config: " + std::string(e.what()));
  }
  return f;
}

namespace {

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& raw) {
  std::istringstream in(raw);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof())
    throw ValidationError("config: [" + section + "] " + key + " = '" + raw + "' is not valid");
  return value;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ValidationError("config: [" + section + "] " + key + " = '" + raw + "' is not a boolean");
}

std::vector<std::size_t> parse_sizes(const std::string& section, const std::string& key,
                                     const std::string& raw) {
  std::vector<std::size_t> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ','))
    out.push_back(parse_value<std::size_t>(section, key, item));
  return out;
}

}  // namespace

void ConfigFile::apply(RunConfig& c) const {
  for (const auto& [section, body] : tree_) {
    if (body.empty() && !body.data().empty())
      throw ValidationError("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string& v = node.data();
      auto size = [&] { return parse_value<std::size_t>(section, key, v); };
      auto real = [&] { return parse_value<double>(section, key, v); };
      auto u64 = [&] { return parse_value<std::uint64_t>(section, key, v); };
      bool known = true;
      if (section == "data") {
        if (key == "split_seed") c.split_seed = u64();
        else if (key == "min_freq") c.min_freq = parse_value<int>(section, key, v);
        else known = false;
      } else if (section == "model") {
        auto& e = c.model.encoder;
        if (key == "encoder") e.kind = nn::parse_encoder_kind(v);
        else if (key == "embedding_dim") e.embedding_dim = size();
        else if (key == "hidden_dim") e.hidden_dim = size();
        else if (key == "cnn_filters") e.cnn_filters = size();
        else if (key == "cnn_filter_sizes") e.cnn_filter_sizes = parse_sizes(section, key, v);
        else known = false;
      } else if (section == "cvae") {
        auto& g = c.model.cvae;
        if (key == "latent_dim") g.latent_dim = size();
        else if (key == "control_dim") g.control_dim = size();
        else if (key == "embedding_dim") g.embedding_dim = size();
        else if (key == "explanation_hidden") g.explanation_hidden = size();
        else if (key == "mlp_hidden") g.mlp_hidden = size();
        else if (key == "decoder_hidden") g.decoder_hidden = size();
        else if (key == "max_decode_len") g.max_decode_len = size();
        else known = false;
      } else if (section == "classifier") {
        if (key == "embedding_dim") c.classifier.embedding_dim = size();
        else if (key == "hidden_dim") c.classifier.hidden_dim = size();
        else if (key == "batch_size") c.pretrain.batch_size = size();
        else if (key == "learning_rate") c.pretrain.learning_rate = real();
        else if (key == "max_epochs") c.pretrain.max_epochs = size();
        else if (key == "patience") c.pretrain.patience = size();
        else known = false;
      } else if (section == "train") {
        auto& t = c.train;
        if (key == "batch_size") t.batch_size = size();
        else if (key == "learning_rate") t.learning_rate = real();
        else if (key == "epochs") t.epochs = size();
        else if (key == "max_steps") t.max_steps = size();
        else if (key == "gradient_mode") t.gradient_mode = parse_gradient_mode(v);
        else if (key == "weight_loss") t.weights.loss = real();
        else if (key == "weight_mrt") t.weights.mrt = real();
        else if (key == "explanation_loss") t.explanation_loss = parse_bool(section, key, v);
        else if (key == "predictor_freeze") t.predictor_freeze = parse_bool(section, key, v);
        else if (key == "freeze_threshold") t.freeze_threshold = real();
        else if (key == "freeze_margin") t.freeze_margin = real();
        else if (key == "kl_anneal_fraction") t.kl_anneal_fraction = real();
        else known = false;
      } else {
        throw ValidationError("config: unknown section [" + section + "]");
      }
      if (!known) throw ValidationError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
}

}  // namespace gef::cli
