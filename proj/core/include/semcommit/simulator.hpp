#pragma once

#include <cstdint>
#include <vector>

#include "semcommit/multilog.hpp"
#include "semcommit/scenario.hpp"
#include "semcommit/trace.hpp"

namespace semcommit {

struct RunResult {
  Trace trace;
  /// Site multilogs at the end of the run, indexed by site - 1.
  std::vector<Multilog> finals;
  /// True if the run stopped because every site agreed and decided every
  /// submitted action; false if the horizon was reached first.
  bool quiescent = false;
  std::uint64_t processed = 0;
  std::uint64_t last_tick = 0;
};

/// Executes the scenario deterministically. Throws InvalidScenario if it
/// does not validate.
RunResult run(const Scenario& sc);

}  // namespace semcommit
