#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "rnm/channel.hpp"
#include "rnm/errors.hpp"
#include "rnm/rnm_codec.hpp"
#include "rnm/sync_rng.hpp"

namespace rnm {

/// Oversampling and switching-ramp parameters for waveform synthesis.
/// ramp_fraction is the fraction of a slot spent ramping at each on/off
/// transition; 0 means hard switching.
struct WaveformParams {
  int samples_per_slot = 4;
  double ramp_fraction = 0.0;

  void validate() const {
    if (samples_per_slot < 2)
      throw ConfigError("WaveformParams: samples_per_slot must be >= 2");
    if (ramp_fraction < 0.0 || ramp_fraction > 0.5)
      throw ConfigError("WaveformParams: ramp_fraction must be in [0, 0.5]");
  }
};

/// Expands each slot to Q samples of its symbol value. At every transition
/// between zero and non-zero (either direction, stream boundaries count as
/// off) the amplitude follows the raised-cosine ramp
/// g(u) = (1 - cos(pi u / rho)) / 2 over the ramp portion of the slot,
/// evaluated at sample midpoints u = (j + 0.5) / Q.
inline std::vector<ComplexSample> synthesize(std::span<const ComplexSample> slot_symbols,
                                             const WaveformParams& params) {
  params.validate();
  const int q = params.samples_per_slot;
  const double rho = params.ramp_fraction;
  std::vector<ComplexSample> samples;
  samples.reserve(slot_symbols.size() * static_cast<std::size_t>(q));
  const auto is_off = [&](std::size_t slot) {
    return slot >= slot_symbols.size() ||
           (slot_symbols[slot].real() == 0.0 && slot_symbols[slot].imag() == 0.0);
  };
  for (std::size_t slot = 0; slot < slot_symbols.size(); ++slot) {
    const ComplexSample value = slot_symbols[slot];
    if (is_off(slot)) {
      samples.insert(samples.end(), static_cast<std::size_t>(q), ComplexSample{});
      continue;
    }
    const bool turn_on = slot == 0 || is_off(slot - 1);
    const bool turn_off = is_off(slot + 1);
    for (int j = 0; j < q; ++j) {
      const double u = (j + 0.5) / q;
      double gain = 1.0;
      if (turn_on && rho > 0.0 && u < rho)
        gain *= 0.5 * (1.0 - std::cos(std::numbers::pi * u / rho));
      if (turn_off && rho > 0.0 && (1.0 - u) < rho)
        gain *= 0.5 * (1.0 - std::cos(std::numbers::pi * (1.0 - u) / rho));
      samples.push_back(value * gain);
    }
  }
  return samples;
}

/// In-place radix-2 Cooley-Tukey FFT; length must be a power of two.
inline void fft_in_place(std::vector<ComplexSample>& a) {
  const std::size_t n = a.size();
  if (n == 0 || !std::has_single_bit(n))
    throw ConfigError("fft_in_place: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const ComplexSample wlen = std::polar(1.0, -2.0 * std::numbers::pi / len);
    for (std::size_t i = 0; i < n; i += len) {
      ComplexSample w{1.0, 0.0};
      for (std::size_t j = 0; j < len / 2; ++j) {
        const ComplexSample u = a[i + j];
        const ComplexSample v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Two-sided averaged-periodogram PSD estimate. freqs ascend and are in
/// cycles/slot (cycles/sample when samples_per_slot is 1); the integral of
/// psd over frequency equals the mean power of the record.
struct PsdEstimate {
  std::vector<double> freqs;
  std::vector<double> psd;
  double resolution = 0.0;
  std::size_t segment_count = 0;

  double integral() const {
    return std::accumulate(psd.begin(), psd.end(), 0.0) * resolution;
  }
};

/// Welch estimate: periodic Hann window, 50% overlap, averaged
/// periodograms. The window-power normalization is calibrated against the
/// record's realized mean power so Parseval holds exactly, which keeps the
/// estimate honest for sparse bursty waveforms where plain sum-of-squares
/// window normalization drifts by a few percent.
inline PsdEstimate welch_psd(std::span<const ComplexSample> samples,
                             std::size_t segment_len, double samples_per_slot = 1.0) {
  if (segment_len < 2 || !std::has_single_bit(segment_len))
    throw ConfigError("welch_psd: segment_len must be a power of two >= 2");
  if (samples.size() < segment_len)
    throw ConfigError("welch_psd: too few samples for one segment");
  if (!(samples_per_slot > 0.0))
    throw ConfigError("welch_psd: samples_per_slot must be positive");

  std::vector<double> window(segment_len);
  double window_power = 0.0;
  for (std::size_t n = 0; n < segment_len; ++n) {
    window[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / segment_len));
    window_power += window[n] * window[n];
  }

  const std::size_t hop = segment_len / 2;
  std::vector<double> accumulated(segment_len, 0.0);
  std::vector<ComplexSample> segment(segment_len);
  std::size_t segments = 0;
  for (std::size_t offset = 0; offset + segment_len <= samples.size(); offset += hop) {
    for (std::size_t n = 0; n < segment_len; ++n)
      segment[n] = samples[offset + n] * window[n];
    fft_in_place(segment);
    for (std::size_t k = 0; k < segment_len; ++k)
      accumulated[k] += std::norm(segment[k]);
    ++segments;
  }

  PsdEstimate estimate;
  estimate.segment_count = segments;
  estimate.resolution = samples_per_slot / static_cast<double>(segment_len);
  estimate.freqs.resize(segment_len);
  estimate.psd.resize(segment_len);
  const double norm =
      static_cast<double>(segments) * window_power * samples_per_slot;
  for (std::size_t k = 0; k < segment_len; ++k) {
    // fftshift so frequencies ascend from -1/2 to +1/2 of the sample rate
    const std::size_t shifted = (k + segment_len / 2) % segment_len;
    estimate.freqs[k] =
        (static_cast<double>(k) - static_cast<double>(segment_len) / 2.0) /
        static_cast<double>(segment_len) * samples_per_slot;
    estimate.psd[k] = accumulated[shifted] / norm;
  }

  double mean_power = 0.0;
  for (const ComplexSample& x : samples) mean_power += std::norm(x);
  mean_power /= static_cast<double>(samples.size());
  const double integral = estimate.integral();
  if (mean_power > 0.0 && integral > 0.0) {
    const double calibration = mean_power / integral;
    for (double& v : estimate.psd) v *= calibration;
  }
  return estimate;
}

/// Smallest symmetric band about the power centroid containing at least the
/// given fraction of total power. Each bin covers one resolution width, so a
/// single tone occupies about one bin.
inline double occupied_bandwidth(const PsdEstimate& estimate, double fraction = 0.99) {
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw ConfigError("occupied_bandwidth: fraction must be in (0, 1)");
  const double total = std::accumulate(estimate.psd.begin(), estimate.psd.end(), 0.0);
  if (total <= 0.0)
    throw ConfigError("occupied_bandwidth: degenerate all-zero spectrum");
  double centroid = 0.0;
  for (std::size_t k = 0; k < estimate.psd.size(); ++k)
    centroid += estimate.freqs[k] * estimate.psd[k];
  centroid /= total;

  std::vector<std::size_t> order(estimate.psd.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(estimate.freqs[a] - centroid) <
           std::abs(estimate.freqs[b] - centroid);
  });
  double covered = 0.0;
  double reach = 0.0;
  for (const std::size_t k : order) {
    covered += estimate.psd[k];
    reach = std::abs(estimate.freqs[k] - centroid);
    if (covered >= fraction * total) break;
  }
  return 2.0 * reach + estimate.resolution;
}

/// OBW ratio of two sample streams measured through the identical pipeline.
inline double obw_ratio(std::span<const ComplexSample> numerator,
                        std::span<const ComplexSample> denominator,
                        std::size_t segment_len, double fraction = 0.99) {
  const double a = occupied_bandwidth(welch_psd(numerator, segment_len), fraction);
  const double b = occupied_bandwidth(welch_psd(denominator, segment_len), fraction);
  return a / b;
}

/// Inputs of the equal-bit-rate, equal-power spectral comparison between an
/// RNM waveform and a continuous M'-PSK reference.
struct ExpansionSetup {
  RnmConfig rnm{8, 4};
  std::uint32_t continuous_m = 4;
  WaveformParams rnm_wave{4, 0.0};
  std::size_t total_samples = 1u << 16;
  std::size_t segment_len = 1u << 10;
  double fraction = 0.99;
};

namespace detail {

/// RNM slot symbols covering at least `slots` slots, built from uniformly
/// random messages encoded against the synchronized word stream.
inline std::vector<ComplexSample> rnm_slot_symbols(const RnmConfig& cfg, RngSeed seed,
                                                   std::size_t slots,
                                                   const Constellation& constellation) {
  const RngSeed link_seed = derive_substream(seed, 0);
  BitCursor message_cursor{derive_substream(seed, 1)};
  std::size_t count = std::max<std::size_t>(
      64, static_cast<std::size_t>(
              std::ceil(static_cast<double>(slots) / expected_wait_slots(cfg))) *
              2);
  const auto words = synchronized_words(link_seed, cfg);
  for (;;) {
    std::vector<Message> messages(count);
    BitCursor cursor = message_cursor;  // regenerating a prefix keeps encode pure
    for (auto& m : messages)
      m = static_cast<Message>(uniform_below(cursor, cfg.message_space()));
    const TxSchedule schedule =
        encode_stream(messages, words, cfg, std::numeric_limits<std::uint64_t>::max());
    if (schedule.total_slots >= slots) {
      std::vector<ComplexSample> symbols(schedule.total_slots);
      for (const TxEvent& event : schedule.events)
        symbols[event.slot] = constellation.point(event.symbol_index);
      symbols.resize(slots);
      return symbols;
    }
    count *= 2;
  }
}

inline void normalize_power(std::vector<ComplexSample>& samples) {
  double power = 0.0;
  for (const ComplexSample& x : samples) power += std::norm(x);
  power /= static_cast<double>(samples.size());
  if (power <= 0.0) return;
  const double scale = 1.0 / std::sqrt(power);
  for (ComplexSample& x : samples) x *= scale;
}

}  // namespace detail

/// Samples per continuous symbol that put both schemes on a common sample
/// clock at equal bit rate: Q * 2^B * log2(M') / (B * M). The setup is
/// rejected when that is not an integer >= 2.
inline int continuous_samples_per_symbol(const ExpansionSetup& setup) {
  setup.rnm.validate();
  setup.rnm_wave.validate();
  if (setup.continuous_m < 2)
    throw ConfigError("expansion_factor: need continuous M' >= 2");
  const double rate_ratio =
      static_cast<double>(setup.rnm.message_space()) *
      std::log2(static_cast<double>(setup.continuous_m)) /
      (static_cast<double>(setup.rnm.message_bits) * setup.rnm.symbol_count);
  const double q_real = setup.rnm_wave.samples_per_slot * rate_ratio;
  const auto q = static_cast<std::int64_t>(std::llround(q_real));
  if (q < 2 || std::abs(q_real - static_cast<double>(q)) > 1e-9)
    throw ConfigError(
        "expansion_factor: equal-bit-rate sample grids do not align; "
        "choose Q so that Q * 2^B * log2(M') / (B * M) is an integer >= 2");
  return static_cast<int>(q);
}

/// Unit-power RNM waveform of exactly total_samples samples.
inline std::vector<ComplexSample> make_rnm_waveform(const ExpansionSetup& setup,
                                                    RngSeed seed) {
  setup.rnm.validate();
  setup.rnm_wave.validate();
  const Constellation points = Constellation::psk(setup.rnm.symbol_count, 1.0);
  const std::size_t slots =
      (setup.total_samples + setup.rnm_wave.samples_per_slot - 1) /
      setup.rnm_wave.samples_per_slot;
  std::vector<ComplexSample> wave =
      synthesize(detail::rnm_slot_symbols(setup.rnm, seed, slots, points),
                 setup.rnm_wave);
  wave.resize(setup.total_samples);
  detail::normalize_power(wave);
  return wave;
}

/// Unit-power continuous M'-PSK waveform at the matched symbol rate.
inline std::vector<ComplexSample> make_continuous_waveform(const ExpansionSetup& setup,
                                                           RngSeed seed) {
  const int q = continuous_samples_per_symbol(setup);
  const Constellation points = Constellation::psk(setup.continuous_m, 1.0);
  const std::size_t symbols =
      (setup.total_samples + static_cast<std::size_t>(q) - 1) /
      static_cast<std::size_t>(q);
  std::vector<ComplexSample> slot_symbols(symbols);
  BitCursor symbol_cursor{derive_substream(seed, 2)};
  for (auto& s : slot_symbols)
    s = points.point(
        static_cast<std::uint32_t>(uniform_below(symbol_cursor, setup.continuous_m)));
  std::vector<ComplexSample> wave =
      synthesize(slot_symbols, {q, setup.rnm_wave.ramp_fraction});
  wave.resize(setup.total_samples);
  detail::normalize_power(wave);
  return wave;
}

struct ExpansionMeasurement {
  double factor = 0.0;
  double obw_rnm = 0.0;         // cycles/sample
  double obw_continuous = 0.0;  // cycles/sample
};

/// OBW(RNM) / OBW(continuous) at equal bit rate and equal mean power, on the
/// common cycles/sample axis.
inline ExpansionMeasurement measure_expansion(const ExpansionSetup& setup,
                                              RngSeed seed) {
  const std::vector<ComplexSample> rnm_wave = make_rnm_waveform(setup, seed);
  const std::vector<ComplexSample> cont_wave = make_continuous_waveform(setup, seed);
  ExpansionMeasurement m;
  m.obw_rnm =
      occupied_bandwidth(welch_psd(rnm_wave, setup.segment_len), setup.fraction);
  m.obw_continuous =
      occupied_bandwidth(welch_psd(cont_wave, setup.segment_len), setup.fraction);
  m.factor = m.obw_rnm / m.obw_continuous;
  return m;
}

inline double expansion_factor(const ExpansionSetup& setup, RngSeed seed) {
  return measure_expansion(setup, seed).factor;
}

}  // namespace rnm
