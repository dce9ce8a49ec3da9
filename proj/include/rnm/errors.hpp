#pragma once

#include <stdexcept>
#include <string>

namespace rnm {

/// Invalid configuration value or violated call precondition.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// An encoder or compressor ran past its slot budget. Signals an unusably
/// large expected waiting time for the chosen parameters.
struct SlotBudgetExceeded : std::runtime_error {
  explicit SlotBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// No emission schedule is consistent with the received sequence.
struct InfeasibleSchedule : std::runtime_error {
  explicit InfeasibleSchedule(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rnm
