#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rnm/channel.hpp"
#include "rnm/errors.hpp"
#include "rnm/rnm_codec.hpp"
#include "rnm/sync_rng.hpp"

namespace rnm {

/// Per-slot detector verdict: empty, or the index of a non-zero symbol.
struct DetectionEvent {
  SlotIndex slot = 0;
  std::optional<std::uint32_t> symbol;

  bool empty() const { return !symbol.has_value(); }
};

/// ML minimizes |y - c|^2 over candidates; MAP subtracts N0 * ln(prior).
/// The default MAP priors come from the design-time match probability:
/// prior(empty) = 1 - p, prior(symbol k) = p / M.
///
/// exclude_zero restricts candidates to the non-zero symbols; used to check
/// the measured substitution rate against the plain M-PSK reference curve.
struct DetectorMode {
  enum class Kind { ml, map };

  Kind kind = Kind::ml;
  double prior_empty = 0.0;
  double prior_symbol = 0.0;
  bool exclude_zero = false;

  static DetectorMode ml() { return {}; }

  static DetectorMode map(double prior_empty, double prior_symbol) {
    if (!(prior_empty > 0.0) || !(prior_symbol > 0.0))
      throw ConfigError("DetectorMode: priors must be positive");
    return {Kind::map, prior_empty, prior_symbol, false};
  }

  static DetectorMode map_for(const RnmConfig& cfg) {
    const double p = cfg.match_probability();
    return map(1.0 - p, p / cfg.symbol_count);
  }

  static DetectorMode restricted_ml() { return {Kind::ml, 0.0, 0.0, true}; }
};

namespace detail {
inline double abs2(ComplexSample v) { return std::norm(v); }
}  // namespace detail

/// Single-slot detection over {zero, s_0, ..., s_{M-1}}. Ties go to the
/// earlier candidate in that order (zero first, then ascending index).
inline std::optional<std::uint32_t> slot_detect(ComplexSample y,
                                                const Constellation& constellation,
                                                const ChannelParams& params,
                                                const DetectorMode& mode) {
  const bool map = mode.kind == DetectorMode::Kind::map;
  std::optional<std::uint32_t> best;
  double best_score = std::numeric_limits<double>::infinity();
  if (!mode.exclude_zero) {
    best_score = detail::abs2(y);
    if (map) best_score -= params.noise_density * std::log(mode.prior_empty);
  }
  for (std::uint32_t k = 0; k < constellation.size; ++k) {
    double score = detail::abs2(y - constellation.point(k));
    if (map) score -= params.noise_density * std::log(mode.prior_symbol);
    if (score < best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

/// Messages recovered from a run of per-slot verdicts: each non-empty
/// verdict at slot t decodes one message through the synchronized word r_t.
inline std::vector<Message> decode_detections(std::span<const DetectionEvent> detections,
                                              RngSeed link_seed, const RnmConfig& cfg) {
  std::vector<Message> messages;
  for (const auto& d : detections) {
    if (d.symbol)
      messages.push_back(
          decode_event(rng_bits(link_seed, d.slot, cfg.message_bits), *d.symbol, cfg));
  }
  return messages;
}

struct NaiveReceiveResult {
  std::vector<DetectionEvent> detections;  // one verdict per slot
  std::vector<Message> messages;           // length varies with insertions/deletions
};

/// The slot-by-slot receiver implied by the plain RNM scheme: detect every
/// slot independently, decode every non-empty verdict. Output length differs
/// from the transmitted count whenever a slot is inserted or deleted, which
/// is the mechanism of stream misalignment.
inline NaiveReceiveResult naive_receive(std::span<const ComplexSample> slots,
                                        RngSeed link_seed, const RnmConfig& cfg,
                                        const Constellation& constellation,
                                        const ChannelParams& params,
                                        const DetectorMode& mode) {
  NaiveReceiveResult result;
  result.detections.reserve(slots.size());
  for (std::size_t t = 0; t < slots.size(); ++t)
    result.detections.push_back(
        {static_cast<SlotIndex>(t), slot_detect(slots[t], constellation, params, mode)});
  result.messages = decode_detections(result.detections, link_seed, cfg);
  return result;
}

/// Two-stage frame detector: non-coherent slot selection (argmax |y|^2,
/// lowest slot on ties) followed by coherent symbol detection at that slot
/// (nearest point, lowest index on ties). Exactly one output per frame, so
/// insertions, deletions and the propagation they cause are impossible.
inline PpmSymbol two_stage_detect(std::span<const ComplexSample> frame,
                                  const Constellation& constellation) {
  if (frame.empty()) throw ConfigError("two_stage_detect: empty frame");
  std::uint32_t position = 0;
  double best_energy = detail::abs2(frame[0]);
  for (std::uint32_t t = 1; t < frame.size(); ++t) {
    const double energy = detail::abs2(frame[t]);
    if (energy > best_energy) {
      best_energy = energy;
      position = t;
    }
  }
  std::uint32_t symbol = 0;
  double best_distance = detail::abs2(frame[position] - constellation.point(0));
  for (std::uint32_t k = 1; k < constellation.size; ++k) {
    const double distance = detail::abs2(frame[position] - constellation.point(k));
    if (distance < best_distance) {
      best_distance = distance;
      symbol = k;
    }
  }
  return {position, symbol};
}

/// Exact ML decoding of a complete received sequence with a known message
/// count K.
///
/// Maximizes the sequence log-likelihood
///   sum_emissions -|y_t - s_i|^2/N0  +  sum_empty -|y_t|^2/N0
/// over emission schedules t_1 < ... < t_K with symbols i_1..i_K, subject to
/// transmitter consistency: with m_k = r_{t_k} XOR i_k, no slot strictly
/// between t_{k-1} and t_k may match m_k (the transmitter would have emitted
/// there). Slots after t_K are empty with no constraint.
///
/// Dynamic program over (messages completed, last emission slot); O(K T^2 M)
/// transitions, gap validity maintained incrementally while scanning
/// predecessors downward. Throws InfeasibleSchedule when no schedule
/// satisfies the constraints (possible only with stubbed word streams).
struct SequenceDecodeResult {
  std::vector<Message> messages;
  std::vector<TxEvent> events;  // the maximizing schedule, slots ascending
};

inline SequenceDecodeResult ml_sequence_decode_schedule(
    std::span<const ComplexSample> slots, RngSeed link_seed, const RnmConfig& cfg,
    const Constellation& constellation, const ChannelParams& params,
    std::size_t message_count) {
  const std::size_t total = slots.size();
  if (message_count < 1) throw ConfigError("ml_sequence_decode: need K >= 1");
  if (total < message_count)
    throw ConfigError("ml_sequence_decode: fewer slots than messages");
  if (constellation.size != cfg.symbol_count)
    throw ConfigError("ml_sequence_decode: constellation does not match config");
  params.validate();

  const double inv_n0 = 1.0 / params.noise_density;
  constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

  std::vector<std::uint32_t> words(total);
  for (std::size_t t = 0; t < total; ++t)
    words[t] = rng_bits(link_seed, t, cfg.message_bits);

  // empty_prefix[t] = score of slots [0, t) all being empty
  std::vector<double> empty_prefix(total + 1, 0.0);
  for (std::size_t t = 0; t < total; ++t)
    empty_prefix[t + 1] = empty_prefix[t] - detail::abs2(slots[t]) * inv_n0;

  const auto emission_score = [&](std::size_t t, std::uint32_t i) {
    return -detail::abs2(slots[t] - constellation.point(i)) * inv_n0;
  };
  const auto matches = [&](std::size_t u, Message m) {
    return (words[u] ^ m) < cfg.symbol_count;
  };

  struct Step {
    std::int64_t prev_slot;
    std::uint32_t symbol;
  };
  std::vector<double> prev_best(total, kUnreachable);
  std::vector<double> best(total, kUnreachable);
  std::vector<std::vector<Step>> back(message_count, std::vector<Step>(total));

  // first message: scanning starts at slot 0
  for (std::size_t t = 0; t < total; ++t) {
    for (std::uint32_t i = 0; i < cfg.symbol_count; ++i) {
      const Message m = words[t] ^ i;
      bool valid = true;
      for (std::size_t u = 0; u < t; ++u) {
        if (matches(u, m)) {
          valid = false;
          break;
        }
      }
      if (!valid) continue;
      const double score = empty_prefix[t] + emission_score(t, i);
      if (score > best[t]) {
        best[t] = score;
        back[0][t] = {-1, i};
      }
    }
  }

  for (std::size_t k = 1; k < message_count; ++k) {
    std::swap(prev_best, best);
    std::fill(best.begin(), best.end(), kUnreachable);
    for (std::size_t t = k; t < total; ++t) {
      for (std::uint32_t i = 0; i < cfg.symbol_count; ++i) {
        const Message m = words[t] ^ i;
        const double emit = emission_score(t, i);
        // scan predecessors downward; once the growing gap contains a slot
        // matching m, every earlier predecessor is inconsistent too
        for (std::int64_t a = static_cast<std::int64_t>(t) - 1; a >= 0; --a) {
          if (prev_best[a] != kUnreachable) {
            const double score =
                prev_best[a] + (empty_prefix[t] - empty_prefix[a + 1]) + emit;
            if (score > best[t]) {
              best[t] = score;
              back[k][t] = {a, i};
            }
          }
          if (matches(static_cast<std::size_t>(a), m)) break;
        }
      }
    }
  }

  std::int64_t final_slot = -1;
  double final_score = kUnreachable;
  for (std::size_t t = message_count - 1; t < total; ++t) {
    if (best[t] == kUnreachable) continue;
    const double score = best[t] + (empty_prefix[total] - empty_prefix[t + 1]);
    if (score > final_score) {
      final_score = score;
      final_slot = static_cast<std::int64_t>(t);
    }
  }
  if (final_slot < 0)
    throw InfeasibleSchedule("ml_sequence_decode: no consistent schedule");

  SequenceDecodeResult result;
  result.messages.resize(message_count);
  result.events.resize(message_count);
  std::int64_t t = final_slot;
  for (std::size_t k = message_count; k-- > 0;) {
    const Step step = back[k][static_cast<std::size_t>(t)];
    result.messages[k] = words[static_cast<std::size_t>(t)] ^ step.symbol;
    result.events[k] = {static_cast<SlotIndex>(t), step.symbol};
    t = step.prev_slot;
  }
  return result;
}

inline std::vector<Message> ml_sequence_decode(std::span<const ComplexSample> slots,
                                               RngSeed link_seed, const RnmConfig& cfg,
                                               const Constellation& constellation,
                                               const ChannelParams& params,
                                               std::size_t message_count) {
  return ml_sequence_decode_schedule(slots, link_seed, cfg, constellation, params,
                                     message_count)
      .messages;
}

namespace detail {
/// Gaussian tail integral Q(x).
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
}  // namespace detail

/// Reference coherent M-PSK symbol-error curve: Q(sqrt(2 snr)) for BPSK,
/// 2 Q(sqrt(2 snr) sin(pi/M)) otherwise. Used purely as an overlay for the
/// substitution-rate comparison; no zero symbol involved.
inline double theoretical_ser(std::uint32_t m, double snr) {
  if (m < 2) throw ConfigError("theoretical_ser: need M >= 2");
  if (!(snr > 0.0)) throw ConfigError("theoretical_ser: snr must be positive");
  if (m == 2) return detail::gaussian_q(std::sqrt(2.0 * snr));
  return 2.0 * detail::gaussian_q(std::sqrt(2.0 * snr) * std::sin(std::numbers::pi / m));
}

}  // namespace rnm
