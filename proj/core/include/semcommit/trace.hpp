#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "semcommit/multilog.hpp"
#include "semcommit/protocol.hpp"

namespace semcommit {

enum class EventKind { submit, send, deliver, drop, crash, recover, propose, elect, schedule };

std::string to_string(EventKind k);

struct SubmitInfo {
  std::vector<ActionId> actions;
};

struct MessageInfo {
  std::uint64_t message = 0;
  SiteId from = 0;
  SiteId to = 0;
  /// Set on drop events.
  std::string reason;
};

struct ProposeInfo {
  std::uint64_t ts = 0;
  std::shared_ptr<const Multilog> proposal;
};

struct OpponentVote {
  SiteId source = 0;
  Vote tally;
};

struct ElectInfo {
  SiteId source = 0;
  std::uint64_t ts = 0;
  Vote tally;
  Vote cotally;
  /// Largest tally of a rival incompatible with the candidate.
  Vote against;
  std::vector<OpponentVote> opponents;
  /// Cumulative candidates evaluated at this site.
  std::size_t evaluated = 0;
  std::shared_ptr<const Multilog> candidate;
};

/// The site's tentative schedule together with the site multilog it was
/// chosen from.
struct ScheduleInfo {
  Schedule schedule;
  std::shared_ptr<const Multilog> multilog;
};

using EventPayload =
    std::variant<std::monostate, SubmitInfo, MessageInfo, ProposeInfo, ElectInfo, ScheduleInfo>;

struct TraceEvent {
  std::uint64_t index = 0;
  std::uint64_t tick = 0;
  SiteId site = 0;
  EventKind kind = EventKind::submit;
  EventPayload payload;
};

using Trace = std::vector<TraceEvent>;

class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One line per event: index, tick, site, kind, then key=value fields,
/// tab separated.
std::string format_event(const TraceEvent& e);
void write_trace(std::ostream& out, const Trace& t);

TraceEvent parse_event(const std::string& line);
Trace read_trace(std::istream& in);

}  // namespace semcommit
