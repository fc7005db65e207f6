#pragma once

#include <cstddef>
#include <vector>

#include "semcommit/multilog.hpp"

namespace semcommit::testing {

/// Independent brute-force view of a multilog: all sound schedules over
/// the members of K, built from the schedule conditions alone.
struct BruteForce {
  std::vector<Schedule> schedules;
  ActionSet in_every;  // intersection, kInit included when nonempty
  ActionSet in_some;   // union

  bool sound() const { return !schedules.empty(); }
};

/// Direct check of the schedule conditions: starts at kInit, distinct
/// members of m, not_after order respected among scheduled actions,
/// every enabler of a scheduled action scheduled too.
bool schedule_ok(const Schedule& s, const Multilog& m);

BruteForce brute_force(const Multilog& m);

/// Same classification as brute_force, but keeps one schedule per distinct
/// action set, so it scales to larger multilogs.
BruteForce schedule_sets(const Multilog& m);

/// The cycle rule taken literally: beta dies if it lies on a not_after
/// cycle whose other vertices are all guaranteed, or if an enabler of it is
/// dead; iterated with guarantee closure to a joint fixpoint.
ActionSet literal_dead(const Multilog& m);

/// Number of maximal sound schedules, counting schedules that differ only
/// only in the order of unconstrained actions as one.
std::size_t distinct_maximal_schedules(const Multilog& m);

}  // namespace semcommit::testing
