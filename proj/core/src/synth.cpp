#include "gef/text/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace gef::text {

namespace {

using Rng = std::mt19937_64;

template <typename T>
const T& choose(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

void append_words(Tokens& out, const std::string& phrase) {
  for (auto& t : tokenize(phrase)) out.push_back(std::move(t));
}

// ---- numeric (airline) banks ------------------------------------------------

struct FieldBank {
  std::vector<std::string> subjects;
  std::array<std::string, kScoreLevels> exact;
  std::array<std::string, kScoreLevels - 1> boundary;  // boundary[s] sits between s and s+1
};

const std::array<FieldBank, kNumFields>& field_banks() {
  static const std::array<FieldBank, kNumFields> banks = {{
      {{"seat", "seats", "legroom"},
       {"broken", "cramped", "narrow", "adequate", "comfortable", "luxurious"},
       {"wobbly", "tight", "passable", "roomy", "plush"}},
      {{"crew", "cabin staff", "attendants"},
       {"rude", "dismissive", "indifferent", "polite", "attentive", "exceptional"},
       {"curt", "distracted", "courteous", "helpful", "warmhearted"}},
      {{"food", "meal", "catering"},
       {"inedible", "stale", "bland", "acceptable", "tasty", "delicious"},
       {"soggy", "lukewarm", "ordinary", "fresh", "flavourful"}},
      {{"entertainment", "interior", "aircraft"},
       {"filthy", "noisy", "dated", "clean", "modern", "immaculate"},
       {"grimy", "stuffy", "tidy", "bright", "spotless"}},
      {{"ticket", "fare", "price"},
       {"outrageous", "overpriced", "expensive", "fair", "cheap", "unbeatable"},
       {"steep", "pricey", "reasonable", "affordable", "bargain"}},
  }};
  return banks;
}

const std::vector<std::string> kVerbs = {"was", "felt", "seemed"};
const std::vector<std::string> kCities = {"london", "paris",  "dubai",     "singapore", "sydney",
                                          "tokyo",  "doha",   "frankfurt", "toronto",   "madrid"};
const std::vector<std::string> kWhen = {"last month", "in march", "for a holiday", "for work",
                                        "at short notice"};

const std::string& descriptor(int field, int score, Rng& rng) {
  const auto& bank = field_banks()[static_cast<std::size_t>(field)];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < kExactDescriptorProb) return bank.exact[static_cast<std::size_t>(score)];
  if (score == 0) return bank.boundary[0];
  if (score == kScoreLevels - 1) return bank.boundary[kScoreLevels - 2];
  const bool lower = u(rng) < 0.5;
  return bank.boundary[static_cast<std::size_t>(lower ? score - 1 : score)];
}

// ---- text (product) banks -----------------------------------------------------

constexpr int kGrades = kPCMagClasses;

using GradeBank = std::array<std::vector<std::string>, kGrades>;

const GradeBank& pos_bank() {
  static const GradeBank b = {{{"passable", "tolerable"},
                               {"basic", "plain"},
                               {"serviceable", "usable"},
                               {"okay", "fine"},
                               {"decent", "solid"},
                               {"good", "nice"},
                               {"great", "sharp"},
                               {"excellent", "superb"},
                               {"stunning", "flawless"}}};
  return b;
}

const GradeBank& neg_bank() {
  static const GradeBank b = {{{"unusable", "broken"},
                               {"awful", "terrible"},
                               {"poor", "weak"},
                               {"mediocre", "clunky"},
                               {"uneven", "average"},
                               {"dated", "slow"},
                               {"pricey", "bulky"},
                               {"minor", "small"},
                               {"negligible", "trivial"}}};
  return b;
}

const GradeBank& neu_bank() {
  static const GradeBank b = {{{"regrettable"},
                               {"disappointing"},
                               {"lackluster"},
                               {"middling"},
                               {"reasonable"},
                               {"respectable"},
                               {"strong"},
                               {"impressive"},
                               {"outstanding"}}};
  return b;
}

const GradeBank& bank_for(int polarity) {
  switch (polarity) {
    case 0:
      return pos_bank();
    case 1:
      return neg_bank();
    case 2:
      return neu_bank();
    default:
      throw IndexError("polarity out of range");
  }
}

const std::vector<std::string> kNouns = {"picture",  "design",      "battery", "screen",
                                         "keyboard", "speakers",    "build",   "interface",
                                         "camera",   "performance"};
const std::vector<std::string> kProducts = {"laptop", "monitor", "phone",   "tablet",
                                            "router", "printer", "headset", "television"};
const std::vector<std::string> kPicks = {"choice", "option", "pick"};
const std::vector<std::string> kAccessories = {"charger", "stand", "remote", "case", "cable"};

std::vector<std::string> distinct_nouns(std::size_t k, Rng& rng) {
  std::vector<std::string> nouns = kNouns;
  std::shuffle(nouns.begin(), nouns.end(), rng);
  nouns.resize(k);
  return nouns;
}

Tokens attribute_comment(const GradeBank& bank, int grade, Rng& rng) {
  std::uniform_int_distribution<std::size_t> count(1, 2);
  Tokens out;
  for (const auto& noun : distinct_nouns(count(rng), rng)) {
    out.push_back(choose(bank[static_cast<std::size_t>(grade)], rng));
    out.push_back(noun);
    out.emplace_back(".");
  }
  return out;
}

Tokens neutral_comment(int grade, const std::string& product, Rng& rng) {
  Tokens out = {"the", product, "is", "a"};
  out.push_back(choose(neu_bank()[static_cast<std::size_t>(grade)], rng));
  out.push_back(choose(kPicks, rng));
  out.emplace_back(".");
  return out;
}

int noisy_grade(int grade, Rng& rng) {
  std::uniform_int_distribution<int> d(0, 3);
  const int r = d(rng);
  const int shifted = grade + (r == 0 ? -1 : (r == 1 ? 1 : 0));
  return std::clamp(shifted, 0, kGrades - 1);
}

}  // namespace

int skytrax_overall_rule(std::span<const int, kNumFields> subscores) {
  int total = 0;
  for (int s : subscores) total += s;
  const double doubled_mean = 2.0 * static_cast<double>(total) / kNumFields;
  return std::clamp(static_cast<int>(std::lround(doubled_mean)), 1, kSkytraxClasses);
}

std::vector<SkytraxExample> synth_numeric(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> score(0, kScoreLevels - 1);
  std::vector<SkytraxExample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    SkytraxExample ex;
    for (auto& s : ex.subscores) s = score(rng);
    ex.overall = skytrax_overall_rule(ex.subscores);

    std::array<int, kNumFields> order = {0, 1, 2, 3, 4};
    std::shuffle(order.begin(), order.end(), rng);
    const auto& from = choose(kCities, rng);
    std::string to = choose(kCities, rng);
    append_words(ex.review, "we flew from " + from + " to " + to + " .");
    for (int f : order) {
      const auto& bank = field_banks()[static_cast<std::size_t>(f)];
      std::string sentence = "the " + choose(bank.subjects, rng) + " " + choose(kVerbs, rng) +
                             " " + descriptor(f, ex.subscores[static_cast<std::size_t>(f)], rng) +
                             " .";
      append_words(ex.review, sentence);
    }
    append_words(ex.review, "i booked this flight " + choose(kWhen, rng) + " .");
    validate(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<PCMagExample> synth_text(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> grade_dist(0, kGrades - 1);
  std::vector<PCMagExample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int g = grade_dist(rng);
    const std::string& product = choose(kProducts, rng);
    PCMagExample ex;
    ex.overall = pcmag_overall(g);
    ex.comments[0] = attribute_comment(pos_bank(), g, rng);
    ex.comments[1] = attribute_comment(neg_bank(), g, rng);
    ex.comments[2] = neutral_comment(g, product, rng);

    Tokens& r = ex.review;
    append_words(r, "i spent a week with the " + product + " .");
    for (const auto& noun : distinct_nouns(3, rng)) {
      const auto& adj = choose(pos_bank()[static_cast<std::size_t>(noisy_grade(g, rng))], rng);
      append_words(r, "the " + noun + " is " + adj + " .");
    }
    append_words(r, "it ships with a " + choose(kAccessories, rng) + " .");
    for (const auto& noun : distinct_nouns(2, rng)) {
      const auto& adj = choose(neg_bank()[static_cast<std::size_t>(noisy_grade(g, rng))], rng);
      append_words(r, "but the " + noun + " feels " + adj + " .");
    }
    const auto& verdict = choose(neu_bank()[static_cast<std::size_t>(noisy_grade(g, rng))], rng);
    append_words(r, "overall it is a " + verdict + " " + choose(kPicks, rng) + " .");
    validate(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

int synth_text_grade(int polarity, const Tokens& comment) {
  const GradeBank& bank = bank_for(polarity);
  int found = -1;
  for (const auto& tok : comment) {
    for (int g = 0; g < kGrades; ++g) {
      const auto& words = bank[static_cast<std::size_t>(g)];
      if (std::find(words.begin(), words.end(), tok) == words.end()) continue;
      if (found != -1 && found != g) return -1;
      found = g;
    }
  }
  return found;
}

std::vector<std::string> synth_text_bank_vocabulary(int polarity, int grade) {
  const GradeBank& bank = bank_for(polarity);
  if (grade < 0 || grade >= kGrades) throw IndexError("grade out of range");
  std::set<std::string> vocab(bank[static_cast<std::size_t>(grade)].begin(),
                              bank[static_cast<std::size_t>(grade)].end());
  vocab.insert(".");
  if (polarity == 2) {
    for (const char* w : {"the", "is", "a"}) vocab.insert(w);
    vocab.insert(kProducts.begin(), kProducts.end());
    vocab.insert(kPicks.begin(), kPicks.end());
  } else {
    vocab.insert(kNouns.begin(), kNouns.end());
  }
  return {vocab.begin(), vocab.end()};
}

}  // namespace gef::text
