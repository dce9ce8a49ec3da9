#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "rnm/detectors.hpp"
#include "rnm/errors.hpp"
#include "rnm/rnm_codec.hpp"

namespace rnm {

/// Per-slot comparison of the emission record against detector verdicts.
/// The slot clock is shared, so the three error types are read off a direct
/// slot-by-slot table. Components always sum to total_slots.
struct SlotErrorCounts {
  std::uint64_t insertions = 0;      // empty slot, symbol detected
  std::uint64_t deletions = 0;       // symbol sent, empty detected
  std::uint64_t substitutions = 0;   // wrong non-zero symbol detected
  std::uint64_t correct_symbols = 0;
  std::uint64_t correct_empties = 0;
  std::uint64_t total_slots = 0;

  SlotErrorCounts& operator+=(const SlotErrorCounts& o) {
    insertions += o.insertions;
    deletions += o.deletions;
    substitutions += o.substitutions;
    correct_symbols += o.correct_symbols;
    correct_empties += o.correct_empties;
    total_slots += o.total_slots;
    return *this;
  }
};

inline SlotErrorCounts classify_slot_errors(const TxSchedule& truth,
                                            std::span<const DetectionEvent> detections) {
  if (detections.size() < truth.total_slots)
    throw ConfigError("classify_slot_errors: detections do not cover the schedule");
  SlotErrorCounts counts;
  counts.total_slots = detections.size();
  std::size_t next_event = 0;
  for (std::size_t t = 0; t < detections.size(); ++t) {
    std::optional<std::uint32_t> sent;
    if (next_event < truth.events.size() && truth.events[next_event].slot == t)
      sent = truth.events[next_event++].symbol_index;
    const auto& got = detections[t].symbol;
    if (!sent && !got)
      ++counts.correct_empties;
    else if (!sent && got)
      ++counts.insertions;
    else if (sent && !got)
      ++counts.deletions;
    else if (*sent == *got)
      ++counts.correct_symbols;
    else
      ++counts.substitutions;
  }
  return counts;
}

enum class EditOp : std::uint8_t { match, substitute, del, ins };

/// Unit-cost Levenshtein alignment of decoded against truth, with the
/// opcode trace. Traceback ties prefer MATCH > SUB > DEL > INS so reports
/// are reproducible across implementations.
struct AlignmentReport {
  std::uint64_t edit_distance = 0;
  std::uint64_t insertions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t substitutions = 0;
  std::uint64_t matches = 0;
  std::vector<EditOp> trace;
};

inline AlignmentReport align(std::span<const Message> truth,
                             std::span<const Message> decoded) {
  const std::size_t n = truth.size();
  const std::size_t m = decoded.size();
  std::vector<std::uint32_t> dist((n + 1) * (m + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
    return dist[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diagonal =
          at(i - 1, j - 1) + (truth[i - 1] == decoded[j - 1] ? 0 : 1);
      const std::uint32_t deletion = at(i - 1, j) + 1;
      const std::uint32_t insertion = at(i, j - 1) + 1;
      at(i, j) = std::min(diagonal, std::min(deletion, insertion));
    }
  }

  AlignmentReport report;
  report.edit_distance = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && truth[i - 1] == decoded[j - 1] &&
        at(i, j) == at(i - 1, j - 1)) {
      report.trace.push_back(EditOp::match);
      --i, --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
      report.trace.push_back(EditOp::substitute);
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      report.trace.push_back(EditOp::del);
      --i;
    } else {
      report.trace.push_back(EditOp::ins);
      --j;
    }
  }
  std::reverse(report.trace.begin(), report.trace.end());
  for (const EditOp op : report.trace) {
    switch (op) {
      case EditOp::match: ++report.matches; break;
      case EditOp::substitute: ++report.substitutions; break;
      case EditOp::del: ++report.deletions; break;
      case EditOp::ins: ++report.insertions; break;
    }
  }
  return report;
}

/// Index-by-index error flags and burst structure of a decoded stream.
///
/// flags[k] = 1 iff decoded[k] differs from truth[k]; positions past the end
/// of a short decoded stream count as errors, so a single deletion shows its
/// full downstream propagation. positional_mer is the mean flag;
/// aligned_mer = (ins + del + sub) / |truth| from the optimal alignment.
struct PropagationProfile {
  std::vector<std::uint8_t> positional_error_flags;
  std::map<std::uint64_t, std::uint64_t> burst_length_histogram;
  double positional_mer = 0.0;
  double aligned_mer = 0.0;
};

inline PropagationProfile propagation_profile(std::span<const Message> truth,
                                              std::span<const Message> decoded) {
  if (truth.empty())
    throw ConfigError("propagation_profile: empty truth stream has no defined rates");
  PropagationProfile profile;
  profile.positional_error_flags.resize(truth.size());
  std::uint64_t errors = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool error = k >= decoded.size() || truth[k] != decoded[k];
    profile.positional_error_flags[k] = error ? 1 : 0;
    errors += error ? 1 : 0;
  }
  std::uint64_t run = 0;
  for (const std::uint8_t flag : profile.positional_error_flags) {
    if (flag) {
      ++run;
    } else if (run > 0) {
      ++profile.burst_length_histogram[run];
      run = 0;
    }
  }
  if (run > 0) ++profile.burst_length_histogram[run];
  profile.positional_mer = static_cast<double>(errors) / static_cast<double>(truth.size());
  const AlignmentReport report = align(truth, decoded);
  profile.aligned_mer = static_cast<double>(report.edit_distance) /
                        static_cast<double>(truth.size());
  return profile;
}

}  // namespace rnm
