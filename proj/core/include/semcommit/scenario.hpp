#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semcommit/action.hpp"
#include "semcommit/proposer.hpp"
#include "semcommit/protocol.hpp"
#include "semcommit/schedule.hpp"
#include "semcommit/semantics.hpp"

namespace semcommit {

class InvalidScenario : public std::runtime_error {
 public:
  explicit InvalidScenario(std::vector<std::string> causes);

  const std::vector<std::string>& causes() const { return causes_; }

 private:
  std::vector<std::string> causes_;
};

/// One client action. Submissions sharing a tick and a site form one batch.
struct Submission {
  std::uint64_t tick = 0;
  SiteId site = 0;
  std::string label;
  std::optional<DbPayload> db;
};

/// An explicit gossip send, performed before periodic gossip starts.
struct ScriptedSend {
  std::uint64_t tick = 0;
  SiteId from = 0;
  SiteId to = 0;
};

struct GossipConfig {
  std::uint64_t period = 4;
  std::uint64_t latency = 1;
  std::uint64_t jitter = 0;
  bool delta = false;
  std::vector<ScriptedSend> script;
};

struct Crash {
  SiteId site = 0;
  std::uint64_t at = 0;
  /// nullopt: never recovers.
  std::optional<std::uint64_t> duration;
};

struct FaultConfig {
  double drop = 0.0;
  double duplicate = 0.0;
  double reorder = 0.0;
  std::vector<std::uint64_t> drop_messages;
  std::vector<Crash> crashes;
};

struct Scenario {
  std::size_t sites = 0;
  std::vector<Weight> weights;
  ConstraintOracle oracle;
  std::vector<Submission> submissions;
  GossipConfig gossip;
  FaultConfig faults;
  ProposerKind default_proposer = Optimizing{};
  /// Per-site overrides, indexed by site - 1 (nullopt: default).
  std::vector<std::optional<ProposerKind>> proposers;
  SchedulePolicy schedule_policy = SchedulePolicy::canonical_greedy;
  std::uint64_t seed = 1;
  std::uint64_t horizon = 200000;

  const ProposerKind& proposer_for(SiteId site) const;
};

/// Parses the text form. Throws InvalidScenario on syntax errors.
Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Semantic problems (weights, site references, oracle soundness over the
/// declared actions, calendar rule shape). Empty when valid.
std::vector<std::string> validate(const Scenario& sc);

std::string format_scenario(const Scenario& sc);

/// No permanent crash and no certain message loss.
bool is_fair(const Scenario& sc);

}  // namespace semcommit
