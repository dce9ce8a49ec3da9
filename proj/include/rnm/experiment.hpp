#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rnm/channel.hpp"
#include "rnm/csv.hpp"
#include "rnm/detectors.hpp"
#include "rnm/energy.hpp"
#include "rnm/error_analysis.hpp"
#include "rnm/errors.hpp"
#include "rnm/feedback.hpp"
#include "rnm/rnm_codec.hpp"
#include "rnm/spectrum.hpp"
#include "rnm/sync_rng.hpp"

namespace rnm {

inline constexpr const char* kResultCsvSchema = "rnm-result-v1";
inline constexpr const char* kResultCsvHeader =
    "experiment,scheme,B,M,L,C,snr_db,trials,slots,insertions,deletions,"
    "substitutions,positional_mer,aligned_mer,mean_burst,max_burst,"
    "e_rf_per_bit,e_oh_per_bit,e_total_per_bit,latency_per_bit";

enum class Scheme { rnm, ppm, seqdet, feedback, energy, spectrum, inject };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::rnm: return "rnm";
    case Scheme::ppm: return "ppm";
    case Scheme::seqdet: return "seqdet";
    case Scheme::feedback: return "feedback";
    case Scheme::energy: return "energy";
    case Scheme::spectrum: return "spectrum";
    default: return "inject";
  }
}

/// One experiment: scheme, per-scheme configuration blocks, and the common
/// Monte Carlo knobs. Everything that affects output lives here, so a config
/// plus the library version pins the result bytes.
struct ExperimentConfig {
  std::string experiment;  // CSV id; defaults to the scheme name
  Scheme scheme = Scheme::rnm;
  RngSeed seed = 1;
  std::uint64_t trials = 50;
  std::size_t messages_per_trial = 100;
  std::vector<double> snr_db_list = {0.0, 5.0, 10.0, 15.0};
  DetectorMode::Kind detector = DetectorMode::Kind::map;
  std::uint64_t max_slots = 0;  // 0 = derive from the expected waiting time
  unsigned threads = 1;
  std::string out = "-";
  double symbol_energy = 1.0;
  bool noiseless = false;

  RnmConfig rnm{8, 4};
  PpmConfig ppm{8, 4};
  std::vector<FeedbackConfig> feedback_grid = default_feedback_grid();
  EnergyParams energy{0.0, 1.0, 1.0};
  std::vector<int> energy_b_grid = {2, 4, 6, 8, 10, 12};
  std::vector<std::uint32_t> energy_m_grid = {2, 4};
  std::vector<std::uint32_t> energy_continuous_grid = {2, 4, 8, 16};
  ExpansionSetup spectrum;
  std::string spectrum_waveform = "rnm";  // which PSD goes to the CSV

  static std::vector<FeedbackConfig> default_feedback_grid() {
    std::vector<FeedbackConfig> grid;
    for (int c = 1; c <= 4; ++c) grid.push_back({4, c});
    for (int c = 1; c <= 6; ++c) grid.push_back({5, c});
    return grid;
  }

  std::uint64_t slot_budget() const {
    if (max_slots != 0) return max_slots;
    const double per_message = expected_wait_slots(rnm);
    return static_cast<std::uint64_t>(per_message * messages_per_trial * 30.0) + 4096;
  }

  void validate() const {
    if (experiment.find(',') != std::string::npos ||
        experiment.find('\n') != std::string::npos)
      throw ConfigError("config: experiment id must not contain ',' or newline");
    if (trials < 1) throw ConfigError("config: trials must be >= 1");
    if (messages_per_trial < 1)
      throw ConfigError("config: messages_per_trial must be >= 1");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    if (!(symbol_energy > 0.0)) throw ConfigError("config: symbol_energy must be > 0");
    switch (scheme) {
      case Scheme::rnm:
      case Scheme::seqdet:
      case Scheme::inject:
        rnm.validate();
        break;
      case Scheme::ppm:
        ppm.validate();
        break;
      case Scheme::feedback:
        for (const auto& cfg : feedback_grid) cfg.validate();
        if (feedback_grid.empty()) throw ConfigError("config: empty feedback grid");
        break;
      case Scheme::energy:
        energy.validate();
        break;
      case Scheme::spectrum:
        spectrum.rnm.validate();
        spectrum.rnm_wave.validate();
        break;
    }
    if ((scheme == Scheme::rnm || scheme == Scheme::seqdet) && !noiseless &&
        snr_db_list.empty())
      throw ConfigError("config: snr_db_list must not be empty");
    if (scheme == Scheme::ppm && !noiseless && snr_db_list.empty())
      throw ConfigError("config: snr_db_list must not be empty");
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& j,
                       std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& value) {
  if (const auto it = j.find(key); it != j.end()) value = it->get<T>();
}

}  // namespace detail

/// Parses the JSON mirror of ExperimentConfig (snake_case keys). The scheme
/// comes from the caller (the CLI subcommand); a "scheme" key in the file
/// must agree with it. Unknown keys are rejected.
inline ExperimentConfig parse_config(const nlohmann::json& j, Scheme scheme) {
  ExperimentConfig cfg;
  cfg.scheme = scheme;
  cfg.experiment = scheme_name(scheme);
  if (scheme == Scheme::seqdet) {
    // sequence decoding is quadratic in the trial length; default to short
    // bursts so the paired comparison stays interactive
    cfg.trials = 200;
    cfg.messages_per_trial = 2;
    cfg.rnm = {4, 2};
    cfg.detector = DetectorMode::Kind::ml;
  }
  try {
    detail::check_keys(
        j,
        {"experiment", "scheme", "seed", "trials", "messages_per_trial", "snr_db_list",
         "detector", "max_slots", "threads", "out", "symbol_energy", "noiseless",
         "rnm", "ppm", "feedback_grid", "energy", "spectrum"},
        "config");
    if (const auto it = j.find("scheme"); it != j.end()) {
      const auto named = it->get<std::string>();
      if (named != scheme_name(scheme))
        throw ConfigError("config: scheme '" + named + "' does not match subcommand '" +
                          scheme_name(scheme) + "'");
    }
    detail::read_field(j, "experiment", cfg.experiment);
    detail::read_field(j, "seed", cfg.seed);
    detail::read_field(j, "trials", cfg.trials);
    detail::read_field(j, "messages_per_trial", cfg.messages_per_trial);
    detail::read_field(j, "snr_db_list", cfg.snr_db_list);
    detail::read_field(j, "max_slots", cfg.max_slots);
    detail::read_field(j, "threads", cfg.threads);
    detail::read_field(j, "out", cfg.out);
    detail::read_field(j, "symbol_energy", cfg.symbol_energy);
    detail::read_field(j, "noiseless", cfg.noiseless);
    if (const auto it = j.find("detector"); it != j.end()) {
      const auto mode = it->get<std::string>();
      if (mode == "ml")
        cfg.detector = DetectorMode::Kind::ml;
      else if (mode == "map")
        cfg.detector = DetectorMode::Kind::map;
      else
        throw ConfigError("config: detector must be 'ml' or 'map'");
    }
    if (const auto it = j.find("rnm"); it != j.end()) {
      detail::check_keys(*it, {"message_bits", "symbol_count"}, "rnm");
      detail::read_field(*it, "message_bits", cfg.rnm.message_bits);
      detail::read_field(*it, "symbol_count", cfg.rnm.symbol_count);
    }
    if (const auto it = j.find("ppm"); it != j.end()) {
      detail::check_keys(*it, {"slots_per_frame", "symbol_count"}, "ppm");
      detail::read_field(*it, "slots_per_frame", cfg.ppm.slots_per_frame);
      detail::read_field(*it, "symbol_count", cfg.ppm.symbol_count);
    }
    if (const auto it = j.find("feedback_grid"); it != j.end()) {
      cfg.feedback_grid.clear();
      for (const auto& pair : *it) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError("config: feedback_grid entries must be [N, C] pairs");
        cfg.feedback_grid.push_back({pair[0].get<int>(), pair[1].get<int>()});
      }
    }
    if (const auto it = j.find("energy"); it != j.end()) {
      detail::check_keys(*it,
                         {"overhead_power", "slot_duration", "symbol_energy", "b_grid",
                          "m_grid", "continuous_grid"},
                         "energy");
      detail::read_field(*it, "overhead_power", cfg.energy.overhead_power);
      detail::read_field(*it, "slot_duration", cfg.energy.slot_duration);
      detail::read_field(*it, "symbol_energy", cfg.energy.symbol_energy);
      detail::read_field(*it, "b_grid", cfg.energy_b_grid);
      detail::read_field(*it, "m_grid", cfg.energy_m_grid);
      detail::read_field(*it, "continuous_grid", cfg.energy_continuous_grid);
    }
    if (const auto it = j.find("spectrum"); it != j.end()) {
      detail::check_keys(*it,
                         {"samples_per_slot", "ramp_fraction", "total_samples",
                          "segment_len", "continuous_m", "fraction", "waveform",
                          "message_bits", "symbol_count"},
                         "spectrum");
      detail::read_field(*it, "message_bits", cfg.spectrum.rnm.message_bits);
      detail::read_field(*it, "symbol_count", cfg.spectrum.rnm.symbol_count);
      detail::read_field(*it, "samples_per_slot", cfg.spectrum.rnm_wave.samples_per_slot);
      detail::read_field(*it, "ramp_fraction", cfg.spectrum.rnm_wave.ramp_fraction);
      detail::read_field(*it, "total_samples", cfg.spectrum.total_samples);
      detail::read_field(*it, "segment_len", cfg.spectrum.segment_len);
      detail::read_field(*it, "continuous_m", cfg.spectrum.continuous_m);
      detail::read_field(*it, "fraction", cfg.spectrum.fraction);
      detail::read_field(*it, "waveform", cfg.spectrum_waveform);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

/// One deliberate modification of a detection stream, for reproducing each
/// error type on demand. ADD targets an empty slot, DROP and SWAP non-empty
/// slots.
struct InjectAction {
  enum class Kind { drop, add, swap };
  Kind kind = Kind::drop;
  SlotIndex slot = 0;
  std::uint32_t symbol = 0;  // for add and swap
};

inline std::vector<DetectionEvent> inject(std::span<const DetectionEvent> detections,
                                          const InjectAction& action) {
  std::vector<DetectionEvent> modified(detections.begin(), detections.end());
  const auto it = std::find_if(modified.begin(), modified.end(), [&](const auto& d) {
    return d.slot == action.slot;
  });
  if (it == modified.end()) throw ConfigError("inject: slot not present");
  switch (action.kind) {
    case InjectAction::Kind::drop:
      if (it->empty()) throw ConfigError("inject: DROP needs a non-empty slot");
      it->symbol.reset();
      break;
    case InjectAction::Kind::add:
      if (!it->empty()) throw ConfigError("inject: ADD needs an empty slot");
      it->symbol = action.symbol;
      break;
    case InjectAction::Kind::swap:
      if (it->empty()) throw ConfigError("inject: SWAP needs a non-empty slot");
      it->symbol = action.symbol;
      break;
  }
  return modified;
}

namespace detail {

/// Per-trial, per-lane partial sums; reduced in trial order so output is
/// independent of scheduling.
struct LaneOutcome {
  SlotErrorCounts counts;
  std::uint64_t truth_messages = 0;
  std::uint64_t positional_errors = 0;
  std::uint64_t edit_distance = 0;
  std::map<std::uint64_t, std::uint64_t> bursts;

  LaneOutcome& operator+=(const LaneOutcome& o) {
    counts += o.counts;
    truth_messages += o.truth_messages;
    positional_errors += o.positional_errors;
    edit_distance += o.edit_distance;
    for (const auto& [len, n] : o.bursts) bursts[len] += n;
    return *this;
  }
};

inline LaneOutcome lane_outcome(const TxSchedule& schedule,
                                std::span<const DetectionEvent> detections,
                                std::span<const Message> truth,
                                std::span<const Message> decoded) {
  LaneOutcome outcome;
  outcome.counts = classify_slot_errors(schedule, detections);
  outcome.truth_messages = truth.size();
  const PropagationProfile profile = propagation_profile(truth, decoded);
  for (const std::uint8_t flag : profile.positional_error_flags)
    outcome.positional_errors += flag;
  outcome.edit_distance = align(truth, decoded).edit_distance;
  outcome.bursts = profile.burst_length_histogram;
  return outcome;
}

template <class Fn>
void parallel_trials(std::uint64_t trials, unsigned threads, Fn&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), trials));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < trials; ++i) body(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= trials) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct ResultRow {
  std::string experiment;
  std::string scheme;
  int column_b = 0;
  std::uint32_t column_m = 0;
  std::uint32_t column_l = 0;
  int column_c = 0;
  double snr_db = 0.0;
  std::uint64_t trials = 0;
  LaneOutcome outcome;
  EnergyBreakdown energy;
};

inline void append_row(std::string& csv, const ResultRow& row) {
  double mean_burst = 0.0;
  std::uint64_t max_burst = 0;
  std::uint64_t burst_count = 0;
  std::uint64_t burst_total = 0;
  for (const auto& [len, n] : row.outcome.bursts) {
    burst_count += n;
    burst_total += len * n;
    max_burst = std::max(max_burst, len);
  }
  if (burst_count > 0)
    mean_burst = static_cast<double>(burst_total) / static_cast<double>(burst_count);
  const double truth = static_cast<double>(row.outcome.truth_messages);
  csv += row.experiment;
  csv += ',';
  csv += row.scheme;
  csv += ',';
  csv += format_number(static_cast<std::int64_t>(row.column_b));
  csv += ',';
  csv += format_number(static_cast<std::uint64_t>(row.column_m));
  csv += ',';
  csv += format_number(static_cast<std::uint64_t>(row.column_l));
  csv += ',';
  csv += format_number(static_cast<std::int64_t>(row.column_c));
  csv += ',';
  csv += format_number(row.snr_db);
  csv += ',';
  csv += format_number(row.trials);
  csv += ',';
  csv += format_number(row.outcome.counts.total_slots);
  csv += ',';
  csv += format_number(row.outcome.counts.insertions);
  csv += ',';
  csv += format_number(row.outcome.counts.deletions);
  csv += ',';
  csv += format_number(row.outcome.counts.substitutions);
  csv += ',';
  csv += format_number(truth > 0.0 ? row.outcome.positional_errors / truth : 0.0);
  csv += ',';
  csv += format_number(truth > 0.0 ? row.outcome.edit_distance / truth : 0.0);
  csv += ',';
  csv += format_number(mean_burst);
  csv += ',';
  csv += format_number(max_burst);
  csv += ',';
  csv += format_number(row.energy.rf_per_bit);
  csv += ',';
  csv += format_number(row.energy.overhead_per_bit);
  csv += ',';
  csv += format_number(row.energy.total_per_bit);
  csv += ',';
  csv += format_number(row.energy.latency_per_bit);
  csv += '\n';
}

inline std::vector<Message> uniform_messages(BitCursor& cursor, std::size_t count,
                                             std::uint64_t space) {
  std::vector<Message> messages(count);
  for (auto& m : messages)
    m = static_cast<Message>(uniform_below(cursor, space));
  return messages;
}

inline double snr_to_noise_density(double snr_db, double symbol_energy) {
  return symbol_energy / std::pow(10.0, snr_db / 10.0);
}

inline std::string effective_id(const ExperimentConfig& cfg) {
  return cfg.experiment.empty() ? scheme_name(cfg.scheme) : cfg.experiment;
}

}  // namespace detail

/// Monte Carlo over the slot-level RNM link. Lane 0 is the naive per-slot
/// receiver; seqdet adds lane 1 with the exact sequence decoder on the same
/// noise.
inline std::string run_channel(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool paired = cfg.scheme == Scheme::seqdet;
  const bool ppm_scheme = cfg.scheme == Scheme::ppm;
  const std::size_t lanes = paired ? 2 : 1;
  const std::vector<double> snrs =
      cfg.noiseless ? std::vector<double>{std::numeric_limits<double>::infinity()}
                    : cfg.snr_db_list;

  const Constellation constellation = Constellation::psk(
      ppm_scheme ? cfg.ppm.symbol_count : cfg.rnm.symbol_count, cfg.symbol_energy);
  const DetectorMode mode = cfg.detector == DetectorMode::Kind::ml
                                ? DetectorMode::ml()
                                : DetectorMode::map_for(cfg.rnm);

  using TrialResult = std::vector<std::array<detail::LaneOutcome, 2>>;  // [snr][lane]
  std::vector<TrialResult> results(cfg.trials);

  detail::parallel_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    TrialResult per_snr(snrs.size());
    const RngSeed trial_seed = derive_substream(cfg.seed, trial);
    const RngSeed link_seed = derive_substream(trial_seed, 0);
    BitCursor message_cursor{derive_substream(trial_seed, 1)};

    if (ppm_scheme) {
      const std::uint64_t frame_space =
          std::uint64_t{cfg.ppm.slots_per_frame} * cfg.ppm.symbol_count;
      const std::vector<Message> truth =
          detail::uniform_messages(message_cursor, cfg.messages_per_trial, frame_space);
      TxSchedule schedule;
      std::vector<ComplexSample> clean(cfg.messages_per_trial *
                                       cfg.ppm.slots_per_frame);
      for (std::size_t f = 0; f < truth.size(); ++f) {
        const PpmSymbol s = ppm_encode(truth[f], cfg.ppm);
        const SlotIndex slot = f * cfg.ppm.slots_per_frame + s.position;
        schedule.events.push_back({slot, s.symbol_index});
        schedule.waits.push_back(cfg.ppm.slots_per_frame);
        clean[slot] = constellation.point(s.symbol_index);
      }
      schedule.total_slots = clean.size();
      for (std::size_t si = 0; si < snrs.size(); ++si) {
        const ChannelParams params{
            cfg.noiseless ? 1e-12
                          : detail::snr_to_noise_density(snrs[si], cfg.symbol_energy)};
        BitCursor noise_cursor{derive_substream(trial_seed, 2)};
        std::vector<ComplexSample> received = clean;
        if (!cfg.noiseless)
          for (auto& y : received) y = awgn(y, params, noise_cursor);
        std::vector<DetectionEvent> detections(received.size());
        for (std::size_t t = 0; t < received.size(); ++t)
          detections[t] = {static_cast<SlotIndex>(t), std::nullopt};
        std::vector<Message> decoded(truth.size());
        for (std::size_t f = 0; f < truth.size(); ++f) {
          const std::span<const ComplexSample> frame{
              received.data() + f * cfg.ppm.slots_per_frame, cfg.ppm.slots_per_frame};
          const PpmSymbol detected = two_stage_detect(frame, constellation);
          detections[f * cfg.ppm.slots_per_frame + detected.position].symbol =
              detected.symbol_index;
          decoded[f] = ppm_decode(detected, cfg.ppm);
        }
        per_snr[si][0] = detail::lane_outcome(schedule, detections, truth, decoded);
      }
    } else {
      const std::vector<Message> truth = detail::uniform_messages(
          message_cursor, cfg.messages_per_trial, cfg.rnm.message_space());
      const TxSchedule schedule = encode_stream(
          truth, synchronized_words(link_seed, cfg.rnm), cfg.rnm, cfg.slot_budget());
      std::vector<ComplexSample> clean(schedule.total_slots);
      for (const TxEvent& event : schedule.events)
        clean[event.slot] = constellation.point(event.symbol_index);
      for (std::size_t si = 0; si < snrs.size(); ++si) {
        const ChannelParams params{
            cfg.noiseless ? 1e-12
                          : detail::snr_to_noise_density(snrs[si], cfg.symbol_energy)};
        BitCursor noise_cursor{derive_substream(trial_seed, 2)};
        std::vector<ComplexSample> received = clean;
        if (!cfg.noiseless)
          for (auto& y : received) y = awgn(y, params, noise_cursor);
        const NaiveReceiveResult naive =
            naive_receive(received, link_seed, cfg.rnm, constellation, params, mode);
        per_snr[si][0] =
            detail::lane_outcome(schedule, naive.detections, truth, naive.messages);
        if (paired) {
          const SequenceDecodeResult sequence = ml_sequence_decode_schedule(
              received, link_seed, cfg.rnm, constellation, params, truth.size());
          std::vector<DetectionEvent> detections(received.size());
          for (std::size_t t = 0; t < received.size(); ++t)
            detections[t] = {static_cast<SlotIndex>(t), std::nullopt};
          for (const TxEvent& event : sequence.events)
            detections[event.slot].symbol = event.symbol_index;
          per_snr[si][1] =
              detail::lane_outcome(schedule, detections, truth, sequence.messages);
        }
      }
    }
    results[trial] = std::move(per_snr);
  });

  std::string csv = std::string(kResultCsvHeader) + '\n';
  for (std::size_t si = 0; si < snrs.size(); ++si) {
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      detail::ResultRow row;
      row.experiment = detail::effective_id(cfg);
      if (paired) row.experiment += lane == 0 ? "-naive" : "-mlseq";
      row.scheme = ppm_scheme ? "ppm" : "rnm";
      if (ppm_scheme) {
        row.column_b = cfg.ppm.bits_per_frame();
        row.column_m = cfg.ppm.symbol_count;
        row.column_l = cfg.ppm.slots_per_frame;
        row.energy = ppm_energy(cfg.energy, cfg.ppm);
      } else {
        row.column_b = cfg.rnm.message_bits;
        row.column_m = cfg.rnm.symbol_count;
        row.energy = rnm_energy(cfg.energy, cfg.rnm);
      }
      row.snr_db = snrs[si];
      row.trials = cfg.trials;
      for (std::uint64_t trial = 0; trial < cfg.trials; ++trial)
        row.outcome += results[trial][si][lane];
      detail::append_row(csv, row);
    }
  }
  return csv;
}

/// Noiseless taxonomy demonstration: three rows, one per injected error
/// type, on a stream of pairwise-distinct messages.
inline std::string run_inject(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.rnm.message_bits > 20)
    throw ConfigError("inject: message_bits above 20 is not supported here");
  const std::uint64_t space = cfg.rnm.message_space();
  if (cfg.messages_per_trial > space)
    throw ConfigError("inject: messages_per_trial exceeds the message space");
  const RngSeed link_seed = derive_substream(cfg.seed, 0);
  BitCursor shuffle_cursor{derive_substream(cfg.seed, 1)};

  // distinct messages: partial Fisher-Yates over the message space
  std::vector<Message> pool(space);
  std::iota(pool.begin(), pool.end(), Message{0});
  for (std::size_t i = 0; i < cfg.messages_per_trial; ++i) {
    const auto j =
        i + static_cast<std::size_t>(uniform_below(shuffle_cursor, space - i));
    std::swap(pool[i], pool[j]);
  }
  const std::vector<Message> truth(pool.begin(),
                                   pool.begin() + cfg.messages_per_trial);

  const TxSchedule schedule = encode_stream(
      truth, synchronized_words(link_seed, cfg.rnm), cfg.rnm, cfg.slot_budget());
  std::vector<DetectionEvent> detections(schedule.total_slots);
  for (std::size_t t = 0; t < detections.size(); ++t)
    detections[t] = {static_cast<SlotIndex>(t), std::nullopt};
  for (const TxEvent& event : schedule.events)
    detections[event.slot].symbol = event.symbol_index;

  const TxEvent& middle = schedule.events[schedule.events.size() / 2];
  SlotIndex empty_slot = 0;
  while (empty_slot < detections.size() && detections[empty_slot].symbol) ++empty_slot;
  if (empty_slot == detections.size())
    throw ConfigError("inject: schedule has no empty slot to corrupt");
  const std::array<std::pair<const char*, InjectAction>, 3> actions{{
      {"-drop", {InjectAction::Kind::drop, middle.slot, 0}},
      {"-add", {InjectAction::Kind::add, empty_slot, 0}},
      {"-swap",
       {InjectAction::Kind::swap, middle.slot,
        (middle.symbol_index + 1) % cfg.rnm.symbol_count}},
  }};

  std::string csv = std::string(kResultCsvHeader) + '\n';
  for (const auto& [suffix, action] : actions) {
    const std::vector<DetectionEvent> modified = inject(detections, action);
    const std::vector<Message> decoded =
        decode_detections(modified, link_seed, cfg.rnm);
    detail::ResultRow row;
    row.experiment = detail::effective_id(cfg) + suffix;
    row.scheme = "rnm";
    row.column_b = cfg.rnm.message_bits;
    row.column_m = cfg.rnm.symbol_count;
    row.snr_db = std::numeric_limits<double>::infinity();
    row.trials = 1;
    row.outcome = detail::lane_outcome(schedule, modified, truth, decoded);
    row.energy = rnm_energy(cfg.energy, cfg.rnm);
    detail::append_row(csv, row);
  }
  return csv;
}

/// Analytic + Monte Carlo latency/compression table for the feedback codec.
inline std::string run_feedback(const ExperimentConfig& cfg) {
  cfg.validate();
  std::uint64_t budget = cfg.max_slots;
  if (budget == 0) {
    double worst = 0.0;
    for (const auto& row : cfg.feedback_grid)
      worst = std::max(worst,
                       expected_match_slots(
                           static_cast<double>(row.message_space()),
                           static_cast<double>(row.candidates_per_slot())));
    budget = static_cast<std::uint64_t>(worst * 64.0) + 4096;
  }
  const std::vector<CompressionRow> rows =
      latency_compression_table(cfg.feedback_grid, cfg.seed, cfg.trials, budget);
  std::string csv = "N,C,log2W,expected_slots_analytic,expected_slots_mc,bits_saved\n";
  for (const CompressionRow& row : rows) {
    csv += format_number(static_cast<std::int64_t>(row.perm_length));
    csv += ',';
    csv += format_number(static_cast<std::int64_t>(row.report_bits));
    csv += ',';
    csv += format_number(row.log2_message_space);
    csv += ',';
    csv += format_number(row.expected_slots_analytic);
    csv += ',';
    csv += format_number(row.expected_slots_measured);
    csv += ',';
    csv += format_number(row.bits_saved);
    csv += '\n';
  }
  return csv;
}

struct EnergySummary {
  SweepEntry argmin;
  SweepEntry latency_argmin_entry;
  double dominance_threshold = 0.0;
};

/// Energy/latency sweep table per the energy module's CSV contract.
inline std::string run_energy(const ExperimentConfig& cfg, EnergySummary* summary = nullptr) {
  cfg.validate();
  std::vector<RnmConfig> grid;
  for (const int b : cfg.energy_b_grid)
    for (const std::uint32_t m : cfg.energy_m_grid)
      if (static_cast<std::uint64_t>(m) < (std::uint64_t{1} << b) && m >= 2)
        grid.push_back({b, m});
  const SweepResult sweep =
      tradeoff_sweep(cfg.energy, grid, cfg.energy_continuous_grid);
  if (summary) {
    summary->argmin = sweep.table[sweep.argmin_index];
    summary->latency_argmin_entry = sweep.table[latency_argmin(sweep)];
    summary->dominance_threshold = latency_dominance_threshold(sweep);
  }
  std::string csv =
      "scheme,B,M,e_rf_per_bit,e_oh_per_bit,e_total_per_bit,latency_per_bit\n";
  for (const SweepEntry& entry : sweep.table) {
    csv += entry.scheme;
    csv += ',';
    csv += format_number(static_cast<std::int64_t>(entry.bits));
    csv += ',';
    csv += format_number(static_cast<std::uint64_t>(entry.m));
    csv += ',';
    csv += format_number(entry.energy.rf_per_bit);
    csv += ',';
    csv += format_number(entry.energy.overhead_per_bit);
    csv += ',';
    csv += format_number(entry.energy.total_per_bit);
    csv += ',';
    csv += format_number(entry.energy.latency_per_bit);
    csv += '\n';
  }
  return csv;
}

struct SpectrumSummary {
  ExpansionMeasurement measurement;
  double obw_selected = 0.0;  // cycles/slot of the emitted waveform
};

/// PSD of the selected waveform (freq_norm in cycles/slot, psd in dB) plus
/// the equal-bit-rate expansion measurement.
inline std::string run_spectrum(const ExperimentConfig& cfg,
                                SpectrumSummary* summary = nullptr) {
  cfg.validate();
  const ExpansionSetup& setup = cfg.spectrum;
  ExpansionMeasurement measurement = measure_expansion(setup, cfg.seed);
  std::vector<ComplexSample> wave;
  double samples_per_slot = 0.0;
  if (cfg.spectrum_waveform == "rnm") {
    wave = make_rnm_waveform(setup, cfg.seed);
    samples_per_slot = setup.rnm_wave.samples_per_slot;
  } else if (cfg.spectrum_waveform == "continuous") {
    wave = make_continuous_waveform(setup, cfg.seed);
    samples_per_slot = continuous_samples_per_symbol(setup);
  } else {
    throw ConfigError("spectrum: waveform must be 'rnm' or 'continuous'");
  }
  const PsdEstimate psd = welch_psd(wave, setup.segment_len, samples_per_slot);
  if (summary) {
    summary->measurement = measurement;
    summary->obw_selected = occupied_bandwidth(psd, setup.fraction);
  }
  std::string csv = "freq_norm,psd_db\n";
  for (std::size_t k = 0; k < psd.psd.size(); ++k) {
    csv += format_number(psd.freqs[k]);
    csv += ',';
    csv += format_number(10.0 * std::log10(std::max(psd.psd[k], 1e-30)));
    csv += '\n';
  }
  return csv;
}

/// Runs the configured experiment and returns the complete CSV result set.
/// Byte-identical output for a given config regardless of thread count.
inline std::string run(const ExperimentConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::rnm:
    case Scheme::ppm:
    case Scheme::seqdet:
      return run_channel(cfg);
    case Scheme::feedback:
      return run_feedback(cfg);
    case Scheme::energy:
      return run_energy(cfg);
    case Scheme::spectrum:
      return run_spectrum(cfg);
    default:
      return run_inject(cfg);
  }
}

}  // namespace rnm
