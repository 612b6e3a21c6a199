#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/errors.hpp"
#include "gef/text/tokenizer.hpp"

namespace gef::text {

enum class Schema { kPCMag, kSkytrax };

std::string to_string(Schema schema);
Schema parse_schema(std::string_view name);

inline constexpr int kPCMagClasses = 9;     // overall 1.0, 1.5, ..., 5.0
inline constexpr int kSkytraxClasses = 10;  // overall 1..10
inline constexpr int kNumFields = 5;
inline constexpr int kScoreLevels = 6;  // sub-field scores 0..5
inline constexpr int kNumPolarities = 3;

inline constexpr std::array<const char*, kNumFields> kFieldKeys = {"seat", "cabin", "food",
                                                                   "inflight", "value"};
/// Column codes used in reports: seat, cabin staff, food, in-flight, ticket value.
inline constexpr std::array<const char*, kNumFields> kFieldCodes = {"s", "c", "f", "i", "t"};
inline constexpr std::array<const char*, kNumPolarities> kPolarityKeys = {"pos", "neg", "neu"};

inline constexpr std::size_t kMaxReviewSentences = 70;
inline constexpr std::size_t kMaxCommentTokens = 75;
inline constexpr std::size_t kMaxSkytraxReviewTokens = 300;

int num_classes(Schema schema);

struct PCMagExample {
  Tokens review;
  std::array<Tokens, kNumPolarities> comments;  // pos, neg, neu
  double overall = 0.0;

  int label() const;
};

struct SkytraxExample {
  Tokens review;
  std::array<int, kNumFields> subscores{};
  int overall = 1;

  int label() const { return overall - 1; }
};

/// round(2 * overall) - 2; throws ValidationError off the 1.0..5.0 half-step grid.
int pcmag_class(double overall);
double pcmag_overall(int label);

/// Throw ValidationError when a schema invariant is violated.
void validate(const PCMagExample& ex);
void validate(const SkytraxExample& ex);

/// Count of sentence-final tokens (. ! ?), at least 1.
std::size_t sentence_count(const Tokens& review);

bool passes_length_filter(const PCMagExample& ex);
bool passes_length_filter(const SkytraxExample& ex);

PCMagExample pcmag_from_json(const nlohmann::json& j);
SkytraxExample skytrax_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PCMagExample& ex);
nlohmann::json to_json(const SkytraxExample& ex);

struct Diagnostic {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <typename Example>
struct LoadResult {
  std::vector<Example> examples;
  std::vector<Diagnostic> diagnostics;
};

LoadResult<PCMagExample> load_pcmag_jsonl(const std::filesystem::path& path);
LoadResult<SkytraxExample> load_skytrax_jsonl(const std::filesystem::path& path);

template <typename Example>
LoadResult<Example> load_jsonl(const std::filesystem::path& path);
template <>
inline LoadResult<PCMagExample> load_jsonl<PCMagExample>(const std::filesystem::path& path) {
  return load_pcmag_jsonl(path);
}
template <>
inline LoadResult<SkytraxExample> load_jsonl<SkytraxExample>(const std::filesystem::path& path) {
  return load_skytrax_jsonl(path);
}

template <typename Example>
void write_jsonl(const std::filesystem::path& path, const std::vector<Example>& examples);

template <typename Example>
struct CorpusSplit {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
  std::uint64_t seed = 0;
};

/// Applies the schema's length filter, then a seeded 8:1:1 shuffle-split
/// (dev and test get floor(n/10) each, train the rest).
template <typename Example>
CorpusSplit<Example> filter_and_split(const std::vector<Example>& examples, std::uint64_t seed) {
  std::vector<const Example*> kept;
  for (const auto& ex : examples)
    if (passes_length_filter(ex)) kept.push_back(&ex);
  if (kept.empty()) throw ValidationError("corpus is empty after length filtering");
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n = kept.size();
  const std::size_t n_held = n / 10;
  CorpusSplit<Example> split;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const Example& ex = *kept[order[i]];
    if (i < n - 2 * n_held) {
      split.train.push_back(ex);
    } else if (i < n - n_held) {
      split.dev.push_back(ex);
    } else {
      split.test.push_back(ex);
    }
  }
  return split;
}

}  // namespace gef::text
