#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "semcommit/multilog.hpp"

namespace semcommit {

/// How a site picks its tentative schedule among the sound ones.
enum class SchedulePolicy { canonical_greedy, maximize_actions, submission_order };

/// Hard cap on brute-force enumeration, in non-initial actions.
inline constexpr std::size_t kMaxEnumeratedActions = 10;

class UniverseTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsoundMultilog : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Visits every schedule sound with respect to m, over all subsets and
/// orderings of its universe. Throws UniverseTooLarge when the universe
/// (kInit excluded) exceeds min(max_actions, kMaxEnumeratedActions).
void for_each_sound_schedule(const Multilog& m, std::size_t max_actions,
                             const std::function<void(const Schedule&)>& visit);

std::vector<Schedule> enumerate_sound_schedules(const Multilog& m, std::size_t max_actions);

/// Deterministic tentative schedule for a site.
///
/// canonical_greedy places the guaranteed actions in canonical topological
/// order, then repeatedly appends any other live action (in `arrival_order`
/// for submission_order, canonical order otherwise) whose enablers are
/// already placed and that no placed action must follow.
///
/// maximize_actions picks a largest sound action set (ties: canonically
/// smallest set) for universes up to kMaxEnumeratedActions and falls back to
/// canonical_greedy beyond.
Schedule choose_site_schedule(const Multilog& m, SchedulePolicy policy,
                              std::span<const ActionId> arrival_order = {});

}  // namespace semcommit
