#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rnm/errors.hpp"
#include "rnm/sync_rng.hpp"

namespace rnm {

/// Synchronized-RNG feedback compression: both ends regenerate the same
/// 2^C candidate permutations per slot, and only the C-bit index of the
/// first match is reported. N <= 10 keeps the message space N! at desk
/// scale.
struct FeedbackConfig {
  int perm_length = 5;  // N
  int report_bits = 4;  // C

  void validate() const {
    if (perm_length < 2 || perm_length > 10)
      throw ConfigError("FeedbackConfig: perm_length must be in [2,10]");
    if (report_bits < 1 || report_bits > 20)
      throw ConfigError("FeedbackConfig: report_bits must be in [1,20]");
  }

  std::uint64_t message_space() const {  // N!
    std::uint64_t w = 1;
    for (int i = 2; i <= perm_length; ++i) w *= static_cast<std::uint64_t>(i);
    return w;
  }
  std::uint64_t candidates_per_slot() const { return std::uint64_t{1} << report_bits; }
};

using PermutationMessage = std::vector<std::uint8_t>;

/// Candidate j of a slot: Fisher-Yates shuffle of the identity permutation,
/// drawing from a cursor seeded by (seed, slot * 2^C + j). Deterministic, so
/// transmitter and receiver regenerate identical candidates.
inline PermutationMessage candidate(RngSeed seed, SlotIndex slot, std::uint64_t index,
                                    const FeedbackConfig& cfg) {
  cfg.validate();
  if (index >= cfg.candidates_per_slot())
    throw ConfigError("candidate: index out of range");
  PermutationMessage perm(static_cast<std::size_t>(cfg.perm_length));
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  BitCursor cursor{derive_substream(seed, slot * cfg.candidates_per_slot() + index)};
  for (std::size_t i = perm.size() - 1; i >= 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(cursor, i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

struct FeedbackReport {
  SlotIndex slot = 0;
  std::uint32_t index = 0;  // the C-bit payload
};

/// Smallest (slot, index) in lexicographic order whose candidate equals the
/// message. Throws SlotBudgetExceeded when no candidate matches within
/// max_slots slots.
inline FeedbackReport compress(const PermutationMessage& message, RngSeed seed,
                               const FeedbackConfig& cfg, std::uint64_t max_slots) {
  cfg.validate();
  if (max_slots < 1) throw ConfigError("compress: max_slots must be >= 1");
  for (SlotIndex slot = 0; slot < max_slots; ++slot) {
    for (std::uint64_t j = 0; j < cfg.candidates_per_slot(); ++j) {
      if (candidate(seed, slot, j, cfg) == message)
        return {slot, static_cast<std::uint32_t>(j)};
    }
  }
  throw SlotBudgetExceeded("compress: no candidate matched within the slot budget");
}

inline PermutationMessage decompress(const FeedbackReport& report, RngSeed seed,
                                     const FeedbackConfig& cfg) {
  return candidate(seed, report.slot, report.index, cfg);
}

/// Expected number of slots searched until a match: candidates are drawn
/// with replacement, so the per-slot success probability is
/// q = 1 - (1 - 1/W)^candidates and the count is geometric with mean 1/q.
/// Accepts candidates = 1 (a zero-bit report), where it reduces to W.
inline double expected_match_slots(double message_space, double candidates) {
  const double q = 1.0 - std::pow(1.0 - 1.0 / message_space, candidates);
  return 1.0 / q;
}

struct CompressionRow {
  int perm_length = 0;
  int report_bits = 0;
  double log2_message_space = 0.0;
  double expected_slots_analytic = 0.0;
  double expected_slots_measured = 0.0;
  double bits_saved = 0.0;
};

/// Uniformly random permutation drawn from the cursor by Fisher-Yates.
inline PermutationMessage random_permutation(BitCursor& cursor, int length) {
  PermutationMessage perm(static_cast<std::size_t>(length));
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  for (std::size_t i = perm.size() - 1; i >= 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(cursor, i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

/// Analytic latency/compression table over a configuration grid, with Monte
/// Carlo means over `trials` uniformly random messages per row. The measured
/// statistic is slots searched, i.e. report.slot + 1.
///
/// Each message compresses against its own substream: with one fixed seed
/// the candidate table is a fixed function, every message has a
/// deterministic matching slot, and the waiting-time law degenerates. On a
/// real link the slot counter keeps advancing between messages, which is
/// exactly what a fresh substream per message models.
inline std::vector<CompressionRow> latency_compression_table(
    std::span<const FeedbackConfig> grid, RngSeed seed, std::uint64_t trials,
    std::uint64_t max_slots) {
  if (grid.empty()) throw ConfigError("latency_compression_table: empty grid");
  std::vector<CompressionRow> rows;
  rows.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const FeedbackConfig& cfg = grid[g];
    cfg.validate();
    const double w = static_cast<double>(cfg.message_space());
    CompressionRow row;
    row.perm_length = cfg.perm_length;
    row.report_bits = cfg.report_bits;
    row.log2_message_space = std::log2(w);
    row.expected_slots_analytic =
        expected_match_slots(w, static_cast<double>(cfg.candidates_per_slot()));
    row.bits_saved = row.log2_message_space - cfg.report_bits;

    const RngSeed row_seed = derive_substream(seed, g);
    BitCursor message_cursor{derive_substream(row_seed, 1)};
    std::uint64_t searched = 0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      const PermutationMessage message =
          random_permutation(message_cursor, cfg.perm_length);
      const RngSeed link_seed = derive_substream(derive_substream(row_seed, 0), trial);
      searched += compress(message, link_seed, cfg, max_slots).slot + 1;
    }
    row.expected_slots_measured =
        trials > 0 ? static_cast<double>(searched) / static_cast<double>(trials) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rnm
