#pragma once

#include <cstdint>
#include <string>

#include "semcommit/scenario.hpp"
#include "semcommit/trace.hpp"

namespace semcommit {

struct Verdict {
  enum class Status { pass, fail, not_applicable };

  Status status = Status::pass;
  /// First counterexample, or the reason the check does not apply.
  std::string detail;

  bool passed() const { return status != Status::fail; }
};

std::string to_string(Verdict::Status s);

/// Every recorded site schedule is sound for the site multilog it was
/// chosen from.
Verdict check_local_soundness(const Trace& t);

/// The union of every site multilog snapshot in the trace is sound; when
/// that union has at most 8 actions, a sound schedule is also found by
/// enumeration.
Verdict check_mergeability(const Trace& t);

/// Every submitted action is decided at every site's last snapshot, and
/// every snapshot is contained in every site's last snapshot. Not
/// applicable to unfair scenarios.
Verdict check_liveness(const Trace& t, const Scenario& sc);

struct Metrics {
  std::size_t sites = 0;
  std::uint64_t messages = 0;
  /// Messages sent while some submitted action was not yet decided at
  /// every site.
  std::uint64_t active_messages = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t submitted = 0;
  /// Submitted actions decided at every site by the end of the trace.
  std::uint64_t decided = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t elections = 0;
  std::uint64_t candidates_evaluated = 0;
  /// Mean number of trace events between an action's submission and the
  /// point where every site holds it decided.
  double mean_decision_latency = 0.0;
  /// messages / decided, 0 when nothing was decided.
  double messages_per_decided = 0.0;
  /// active_messages / committed, 0 when nothing was committed.
  double active_messages_per_committed = 0.0;
  /// Mean submission batch size.
  double batch_degree = 0.0;
};

Metrics metrics(const Trace& t, std::size_t sites);
std::string render_metrics(const Metrics& m);

/// For each election: winner, tally, cotally and opponent tallies.
std::string render_explain(const Trace& t);

}  // namespace semcommit
