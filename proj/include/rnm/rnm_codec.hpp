#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rnm/errors.hpp"
#include "rnm/sync_rng.hpp"

namespace rnm {

/// A B-bit message as an unsigned integer in [0, 2^B).
using Message = std::uint32_t;

/// Parameters of the random-number-modulation link: B bits per message and
/// M non-zero modulation symbols, 2 <= M < 2^B. The per-slot match
/// probability is M / 2^B.
struct RnmConfig {
  int message_bits = 8;
  std::uint32_t symbol_count = 4;

  void validate() const {
    if (message_bits < 1 || message_bits > 32)
      throw ConfigError("RnmConfig: message_bits must be in [1,32]");
    if (symbol_count < 2 || static_cast<std::uint64_t>(symbol_count) >= message_space())
      throw ConfigError("RnmConfig: need 2 <= symbol_count < 2^message_bits");
  }

  std::uint64_t message_space() const { return std::uint64_t{1} << message_bits; }
  double match_probability() const {
    return static_cast<double>(symbol_count) / static_cast<double>(message_space());
  }
};

/// One transmitter emission: the slot it happened in and the symbol sent.
struct TxEvent {
  SlotIndex slot = 0;
  std::uint32_t symbol_index = 0;
};

/// Complete emission record for a message stream. Event slots strictly
/// increase, one event per message; waits[k] is the number of slots message
/// k spent scanning (success slot included).
struct TxSchedule {
  std::vector<TxEvent> events;
  std::uint64_t total_slots = 0;
  std::vector<std::uint64_t> waits;
};

/// The M sequences representing message m are {m XOR d : d in [0, M)}, so a
/// slot word r matches iff (r XOR m) < M; the offset is the symbol index.
inline std::optional<std::uint32_t> match_slot(Message m, std::uint32_t r,
                                               const RnmConfig& cfg) {
  const std::uint32_t offset = r ^ m;
  if (offset < cfg.symbol_count) return offset;
  return std::nullopt;
}

/// Receiver-side inverse of match_slot: the synchronized word plus the
/// detected symbol index recover the message.
inline Message decode_event(std::uint32_t r, std::uint32_t symbol_index,
                            const RnmConfig& cfg) {
  if (symbol_index >= cfg.symbol_count)
    throw ConfigError("decode_event: symbol_index out of range");
  return r ^ symbol_index;
}

/// Scans slots 0,1,2,... emitting each message at the first slot whose word
/// matches it; the next message's scan starts at the following slot.
///
/// `slot_words` is any deterministic source mapping a slot index to the
/// B-bit word r_t (the synchronized generator in production, a stub sequence
/// in tests). Throws SlotBudgetExceeded once the scan would pass max_slots.
template <class SlotWordFn>
TxSchedule encode_stream(std::span<const Message> messages, SlotWordFn&& slot_words,
                         const RnmConfig& cfg, std::uint64_t max_slots) {
  if (max_slots < 1) throw ConfigError("encode_stream: max_slots must be >= 1");
  TxSchedule schedule;
  schedule.events.reserve(messages.size());
  schedule.waits.reserve(messages.size());
  SlotIndex slot = 0;
  for (const Message m : messages) {
    std::uint64_t wait = 0;
    for (;;) {
      if (slot >= max_slots)
        throw SlotBudgetExceeded("encode_stream: no match within slot budget");
      ++wait;
      const std::uint32_t r = slot_words(slot);
      if (const auto symbol = match_slot(m, r, cfg)) {
        schedule.events.push_back({slot, *symbol});
        schedule.waits.push_back(wait);
        ++slot;
        break;
      }
      ++slot;
    }
  }
  schedule.total_slots = schedule.events.empty() ? 0 : schedule.events.back().slot + 1;
  return schedule;
}

/// Adapter: the production slot-word source over the synchronized generator.
inline auto synchronized_words(RngSeed seed, const RnmConfig& cfg) {
  return [seed, bits = cfg.message_bits](SlotIndex slot) {
    return rng_bits(seed, slot, bits);
  };
}

/// Mean of the geometric waiting time, 2^B / M slots per message.
inline double expected_wait_slots(const RnmConfig& cfg) {
  return 1.0 / cfg.match_probability();
}

/// Fixed-frame pulse-position scheme: L slots per frame carry exactly one
/// non-zero M-ary symbol; position and symbol jointly encode
/// log2(L) + log2(M) bits. Both counts must be powers of two.
struct PpmConfig {
  std::uint32_t slots_per_frame = 8;
  std::uint32_t symbol_count = 4;

  void validate() const {
    if (slots_per_frame < 2 || !std::has_single_bit(slots_per_frame))
      throw ConfigError("PpmConfig: slots_per_frame must be a power of two >= 2");
    if (symbol_count < 2 || !std::has_single_bit(symbol_count))
      throw ConfigError("PpmConfig: symbol_count must be a power of two >= 2");
  }

  int bits_per_frame() const {
    return std::bit_width(slots_per_frame) - 1 + std::bit_width(symbol_count) - 1;
  }
};

struct PpmSymbol {
  std::uint32_t position = 0;
  std::uint32_t symbol_index = 0;
};

/// High bits select the slot position, low bits the symbol.
inline PpmSymbol ppm_encode(std::uint32_t bits, const PpmConfig& cfg) {
  if (static_cast<std::uint64_t>(bits) >=
      std::uint64_t{cfg.slots_per_frame} * cfg.symbol_count)
    throw ConfigError("ppm_encode: bits out of range");
  const int symbol_bits = std::bit_width(cfg.symbol_count) - 1;
  return {bits >> symbol_bits, bits & (cfg.symbol_count - 1)};
}

inline std::uint32_t ppm_decode(const PpmSymbol& s, const PpmConfig& cfg) {
  if (s.position >= cfg.slots_per_frame || s.symbol_index >= cfg.symbol_count)
    throw ConfigError("ppm_decode: symbol out of range");
  const int symbol_bits = std::bit_width(cfg.symbol_count) - 1;
  return (s.position << symbol_bits) | s.symbol_index;
}

}  // namespace rnm
