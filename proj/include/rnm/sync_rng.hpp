#pragma once

#include <bit>
#include <cstdint>

#include "rnm/errors.hpp"

namespace rnm {

using RngSeed = std::uint64_t;
using SlotIndex = std::uint64_t;

/// Slot-indexed 64-bit word generator shared by transmitter and receiver.
///
/// Counter-based: the word for any slot is a pure function of (seed, slot),
/// so any slot can be evaluated in isolation (the sequence decoder needs
/// random access) and two instances seeded alike are synchronized by
/// construction. Splitmix-style finalizer; identical on every platform.
constexpr std::uint64_t rng_word(RngSeed seed, SlotIndex slot) noexcept {
  std::uint64_t z = seed + (slot + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Top `bits` bits of the slot word as an integer in [0, 2^bits).
/// The high bits of the mixer are the best-avalanched, and fixing one
/// convention keeps known-answer vectors portable across languages.
constexpr std::uint32_t rng_bits(RngSeed seed, SlotIndex slot, int bits) {
  if (bits < 1 || bits > 32) throw ConfigError("rng_bits: bits must be in [1,32]");
  return static_cast<std::uint32_t>(rng_word(seed, slot) >> (64 - bits));
}

/// Seed for an independent substream (Monte Carlo trials, message sources).
constexpr RngSeed derive_substream(RngSeed seed, std::uint64_t stream_id) noexcept {
  return rng_word(seed, stream_id);
}

/// Sequential word source for shuffles and Gaussian sampling.
///
/// Single-owner mutable state; every draw is a pure function of the seed and
/// the counter values consumed so far, so a cursor can be reconstructed at
/// any point.
struct BitCursor {
  RngSeed seed = 0;
  std::uint64_t next_counter = 0;

  std::uint64_t next_word() { return rng_word(seed, next_counter++); }
};

/// Unbiased draw in [0, k) by top-bits rejection sampling.
///
/// Takes the top ceil(log2 k) bits of successive words, rejecting values
/// >= k. k = 1 returns 0 without consuming a word. Templated on the cursor
/// so tests can substitute a stub word source.
template <class Cursor>
std::uint64_t uniform_below(Cursor& cursor, std::uint64_t k) {
  if (k == 0) throw ConfigError("uniform_below: k must be >= 1");
  if (k == 1) return 0;
  const int bits = std::bit_width(k - 1);
  for (;;) {
    const std::uint64_t value = cursor.next_word() >> (64 - bits);
    if (value < k) return value;
  }
}

}  // namespace rnm
