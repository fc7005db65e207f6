#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "semcommit/multilog.hpp"

namespace semcommit {

class UnsoundInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Decide actions one at a time along a total order. An empty order means
/// canonical (site, seq) order.
struct Conservative {
  std::vector<ActionId> order;
};

/// Search for a proposal with as few dead actions as possible. `budget`
/// bounds the number of search nodes per independent group of actions.
struct Optimizing {
  std::size_t budget = 200000;
};

using ProposerKind = std::variant<Conservative, Optimizing>;

std::string to_string(const ProposerKind& p);

struct RequirementReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks that `output` is an admissible proposal for `input`: it extends
/// the input, adds no actions, adds only decision edges, and is sound and
/// fully stable.
RequirementReport check_proposal_requirements(const Multilog& input, const Multilog& output);

/// Throws UnsoundInput if m is unsound.
Multilog propose_conservative(const Multilog& m, std::span<const ActionId> order = {});

/// Throws UnsoundInput if m is unsound. Actions submitted at
/// `preferred_site` are tried first when choosing which actions survive.
/// Never kills more actions than propose_conservative in canonical order.
Multilog propose_optimizing(const Multilog& m, std::size_t budget = Optimizing{}.budget,
                            SiteId preferred_site = 0);

Multilog propose(const Multilog& m, const ProposerKind& p, SiteId self = 0);

/// Removes guarantee and kill edges of `proposal` that are absent from
/// `base` and implied by the rest, one at a time in canonical order, as long
/// as the guaranteed and dead sets stay the same.
Multilog prune_redundant_decisions(const Multilog& base, Multilog proposal);

}  // namespace semcommit
