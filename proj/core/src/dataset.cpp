#include "gef/text/dataset.hpp"

#include <cmath>
#include <fstream>

namespace gef::text {

std::string to_string(Schema schema) {
  return schema == Schema::kPCMag ? "pcmag" : "skytrax";
}

Schema parse_schema(std::string_view name) {
  if (name == "pcmag") return Schema::kPCMag;
  if (name == "skytrax") return Schema::kSkytrax;
  throw ValidationError("unknown schema '" + std::string(name) + "' (expected pcmag|skytrax)");
}

int num_classes(Schema schema) {
  return schema == Schema::kPCMag ? kPCMagClasses : kSkytraxClasses;
}

int pcmag_class(double overall) {
  const double doubled = 2.0 * overall;
  const double rounded = std::round(doubled);
  if (!std::isfinite(overall) || std::fabs(doubled - rounded) > 1e-9 || rounded < 2.0 ||
      rounded > 10.0)
    throw ValidationError("overall score " + std::to_string(overall) +
                          " is not on the 1.0..5.0 half-step grid");
  return static_cast<int>(rounded) - 2;
}

double pcmag_overall(int label) {
  if (label < 0 || label >= kPCMagClasses) throw IndexError("pcmag class out of range");
  return (label + 2) / 2.0;
}

int PCMagExample::label() const { return pcmag_class(overall); }

void validate(const PCMagExample& ex) {
  if (ex.review.empty()) throw ValidationError("review is empty");
  (void)pcmag_class(ex.overall);
}

void validate(const SkytraxExample& ex) {
  if (ex.review.empty()) throw ValidationError("review is empty");
  for (int f = 0; f < kNumFields; ++f) {
    const int s = ex.subscores[static_cast<std::size_t>(f)];
    if (s < 0 || s >= kScoreLevels)
      throw ValidationError(std::string("subscore '") + kFieldKeys[static_cast<std::size_t>(f)] +
                            "' = " + std::to_string(s) + " outside [0,5]");
  }
  if (ex.overall < 1 || ex.overall > kSkytraxClasses)
    throw ValidationError("overall " + std::to_string(ex.overall) + " outside [1,10]");
}

std::size_t sentence_count(const Tokens& review) {
  std::size_t n = 0;
  for (const auto& t : review)
    if (t == "." || t == "!" || t == "?") ++n;
  return std::max<std::size_t>(n, 1);
}

bool passes_length_filter(const PCMagExample& ex) {
  if (sentence_count(ex.review) > kMaxReviewSentences) return false;
  for (const auto& c : ex.comments)
    if (c.size() > kMaxCommentTokens) return false;
  return true;
}

bool passes_length_filter(const SkytraxExample& ex) {
  return ex.review.size() <= kMaxSkytraxReviewTokens;
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int int_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer())
    throw ValidationError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

template <typename Example, typename Parse>
LoadResult<Example> load_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus: " + path.string());
  LoadResult<Example> result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Example ex = parse(j);
      validate(ex);
      result.examples.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      result.diagnostics.push_back({lineno, std::string("malformed JSON: ") + e.what()});
    } catch (const Error& e) {
      result.diagnostics.push_back({lineno, e.what()});
    }
  }
  return result;
}

}  // namespace

PCMagExample pcmag_from_json(const nlohmann::json& j) {
  PCMagExample ex;
  ex.review = tokenize(string_field(j, "review"));
  for (int p = 0; p < kNumPolarities; ++p)
    ex.comments[static_cast<std::size_t>(p)] =
        tokenize(string_field(j, kPolarityKeys[static_cast<std::size_t>(p)]));
  const auto& overall = field(j, "overall");
  if (!overall.is_number()) throw ValidationError("field 'overall' must be a number");
  ex.overall = overall.get<double>();
  return ex;
}

SkytraxExample skytrax_from_json(const nlohmann::json& j) {
  SkytraxExample ex;
  ex.review = tokenize(string_field(j, "review"));
  for (int f = 0; f < kNumFields; ++f)
    ex.subscores[static_cast<std::size_t>(f)] = int_field(j, kFieldKeys[static_cast<std::size_t>(f)]);
  ex.overall = int_field(j, "overall");
  return ex;
}

nlohmann::json to_json(const PCMagExample& ex) {
  nlohmann::json j;
  j["review"] = join(ex.review);
  for (int p = 0; p < kNumPolarities; ++p)
    j[kPolarityKeys[static_cast<std::size_t>(p)]] = join(ex.comments[static_cast<std::size_t>(p)]);
  j["overall"] = ex.overall;
  return j;
}

nlohmann::json to_json(const SkytraxExample& ex) {
  nlohmann::json j;
  j["review"] = join(ex.review);
  for (int f = 0; f < kNumFields; ++f)
    j[kFieldKeys[static_cast<std::size_t>(f)]] = ex.subscores[static_cast<std::size_t>(f)];
  j["overall"] = ex.overall;
  return j;
}

LoadResult<PCMagExample> load_pcmag_jsonl(const std::filesystem::path& path) {
  return load_lines<PCMagExample>(path, pcmag_from_json);
}

LoadResult<SkytraxExample> load_skytrax_jsonl(const std::filesystem::path& path) {
  return load_lines<SkytraxExample>(path, skytrax_from_json);
}

template <typename Example>
void write_jsonl(const std::filesystem::path& path, const std::vector<Example>& examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
}

template void write_jsonl<PCMagExample>(const std::filesystem::path&,
                                        const std::vector<PCMagExample>&);
template void write_jsonl<SkytraxExample>(const std::filesystem::path&,
                                          const std::vector<SkytraxExample>&);

}  // namespace gef::text
