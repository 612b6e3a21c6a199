#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gef/text/dataset.hpp"

namespace gef::text {

/// clamp(round(2 * mean(subscores)), 1, 10).
int skytrax_overall_rule(std::span<const int, kNumFields> subscores);

/// Airline-style corpus. Subscores are uniform on {0..5}; the review holds one
/// sentence per field whose descriptor comes from that field's bank for the
/// score: the score's own word with probability 0.7, otherwise a word shared
/// with an adjacent score. Field sentences appear in random order between two
/// signal-free filler sentences.
std::vector<SkytraxExample> synth_numeric(std::size_t n, std::uint64_t seed);

/// Product-review corpus. A grade g in {0..8} is the overall class; each
/// comment is built only from grade-g phrase banks (disjoint across grades);
/// the review renders noisy evidence (descriptors of grades g-1, g, g+1).
std::vector<PCMagExample> synth_text(std::size_t n, std::uint64_t seed);

/// Probability that a synthetic numeric review uses the score's own word.
inline constexpr double kExactDescriptorProb = 0.7;

/// Bank membership for synthetic text comments: the grade whose bank
/// contains this comment's grade-specific words, or -1 if none match or the
/// words disagree.
int synth_text_grade(int polarity, const Tokens& comment);

/// Every token that can appear in a grade-`grade` comment of `polarity`.
std::vector<std::string> synth_text_bank_vocabulary(int polarity, int grade);

}  // namespace gef::text
