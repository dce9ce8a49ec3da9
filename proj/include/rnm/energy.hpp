#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rnm/errors.hpp"
#include "rnm/rnm_codec.hpp"

namespace rnm {

/// Overhead power burns whenever the system is on (waiting and transmitting
/// alike); RF energy is Es per emitted non-zero symbol.
struct EnergyParams {
  double overhead_power = 0.0;  // watts
  double slot_duration = 1.0;   // seconds
  double symbol_energy = 1.0;   // joules per non-zero symbol

  void validate() const {
    if (overhead_power < 0.0) throw ConfigError("EnergyParams: overhead_power < 0");
    if (!(slot_duration > 0.0)) throw ConfigError("EnergyParams: slot_duration <= 0");
    if (!(symbol_energy > 0.0)) throw ConfigError("EnergyParams: symbol_energy <= 0");
  }
};

struct EnergyBreakdown {
  double rf_per_bit = 0.0;        // joules/bit
  double overhead_per_bit = 0.0;  // joules/bit
  double total_per_bit = 0.0;     // joules/bit
  double latency_per_bit = 0.0;   // seconds/bit
};

/// Expected per-bit accounting of the RNM link: one Es emission per B-bit
/// message, 2^B/M slots of waiting on average.
inline EnergyBreakdown rnm_energy(const EnergyParams& params, const RnmConfig& cfg) {
  params.validate();
  cfg.validate();
  EnergyBreakdown e;
  e.rf_per_bit = params.symbol_energy / cfg.message_bits;
  e.latency_per_bit =
      params.slot_duration * expected_wait_slots(cfg) / cfg.message_bits;
  e.overhead_per_bit = params.overhead_power * e.latency_per_bit;
  e.total_per_bit = e.rf_per_bit + e.overhead_per_bit;
  return e;
}

/// Same accounting applied to the fixed-frame scheme: one Es emission per
/// frame of L slots carrying log2(L) + log2(M) bits.
inline EnergyBreakdown ppm_energy(const EnergyParams& params, const PpmConfig& cfg) {
  params.validate();
  cfg.validate();
  const double bits = cfg.bits_per_frame();
  EnergyBreakdown e;
  e.rf_per_bit = params.symbol_energy / bits;
  e.latency_per_bit = params.slot_duration * cfg.slots_per_frame / bits;
  e.overhead_per_bit = params.overhead_power * e.latency_per_bit;
  e.total_per_bit = e.rf_per_bit + e.overhead_per_bit;
  return e;
}

/// Continuous M'-PSK reference: one symbol per slot, log2(M') bits each.
inline EnergyBreakdown continuous_energy(const EnergyParams& params,
                                         std::uint32_t m_prime) {
  params.validate();
  if (m_prime < 2) throw ConfigError("continuous_energy: need M' >= 2");
  const double bits = std::log2(static_cast<double>(m_prime));
  EnergyBreakdown e;
  e.rf_per_bit = params.symbol_energy / bits;
  e.latency_per_bit = params.slot_duration / bits;
  e.overhead_per_bit = params.overhead_power * e.latency_per_bit;
  e.total_per_bit = e.rf_per_bit + e.overhead_per_bit;
  return e;
}

/// Overhead power at which the RNM configuration and the continuous
/// reference cost the same total energy per bit.
inline double break_even_overhead(const EnergyParams& params, const RnmConfig& cfg,
                                  std::uint32_t m_prime) {
  EnergyParams rf_only = params;
  rf_only.overhead_power = 0.0;
  const EnergyBreakdown r = rnm_energy(rf_only, cfg);
  const EnergyBreakdown c = continuous_energy(rf_only, m_prime);
  if (r.latency_per_bit == c.latency_per_bit)
    throw ConfigError("break_even_overhead: equal latencies never cross");
  return (c.rf_per_bit - r.rf_per_bit) / (r.latency_per_bit - c.latency_per_bit);
}

struct SweepEntry {
  std::string scheme;    // "rnm" or "continuous"
  int bits = 0;          // B for rnm, log2(M') for continuous
  std::uint32_t m = 0;   // M or M'
  EnergyBreakdown energy;
};

struct SweepResult {
  std::vector<SweepEntry> table;
  std::size_t argmin_index = 0;  // by total energy per bit; first row on ties
};

/// Full table over an (B, M) grid of RNM configurations plus continuous
/// references. Rows are ordered RNM first in (B, M) lexicographic order,
/// then continuous by ascending M', so the first-minimum argmin realizes the
/// smallest-(B, M) tie rule.
inline SweepResult tradeoff_sweep(const EnergyParams& params,
                                  std::span<const RnmConfig> rnm_grid,
                                  std::span<const std::uint32_t> continuous_grid) {
  if (rnm_grid.empty() && continuous_grid.empty())
    throw ConfigError("tradeoff_sweep: empty grid");
  SweepResult result;
  for (const RnmConfig& cfg : rnm_grid)
    result.table.push_back(
        {"rnm", cfg.message_bits, cfg.symbol_count, rnm_energy(params, cfg)});
  for (const std::uint32_t m_prime : continuous_grid)
    result.table.push_back({"continuous",
                            static_cast<int>(std::lround(std::log2(m_prime))), m_prime,
                            continuous_energy(params, m_prime)});
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    if (result.table[i].energy.total_per_bit < best) {
      best = result.table[i].energy.total_per_bit;
      result.argmin_index = i;
    }
  }
  return result;
}

/// Index of the minimum-latency row (smallest RF energy, then table order,
/// on latency ties).
inline std::size_t latency_argmin(const SweepResult& sweep) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.table.size(); ++i) {
    const auto& e = sweep.table[i].energy;
    const auto& b = sweep.table[best].energy;
    if (e.latency_per_bit < b.latency_per_bit ||
        (e.latency_per_bit == b.latency_per_bit && e.rf_per_bit < b.rf_per_bit))
      best = i;
  }
  return best;
}

/// Smallest overhead power P* such that for every P >= P* the total-energy
/// argmin of the sweep is its minimum-latency row. Totals are linear in P,
/// so P* is the largest crossing point against the latency-min row.
inline double latency_dominance_threshold(const SweepResult& sweep) {
  const std::size_t l = latency_argmin(sweep);
  const auto& fast = sweep.table[l].energy;
  double threshold = 0.0;
  for (const auto& row : sweep.table) {
    const auto& e = row.energy;
    if (e.latency_per_bit <= fast.latency_per_bit) continue;
    const double crossing =
        (fast.rf_per_bit - e.rf_per_bit) / (e.latency_per_bit - fast.latency_per_bit);
    if (crossing > threshold) threshold = crossing;
  }
  return threshold;
}

}  // namespace rnm
