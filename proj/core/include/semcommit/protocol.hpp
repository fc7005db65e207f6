#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "semcommit/action.hpp"
#include "semcommit/multilog.hpp"
#include "semcommit/proposer.hpp"
#include "semcommit/semantics.hpp"

namespace semcommit {

using Weight = boost::rational<std::int64_t>;

std::string to_string(const Weight& w);
std::optional<Weight> parse_weight(std::string_view text);

/// (weight, site). Ordered by weight, ties broken by site id.
struct Vote {
  Weight weight{0};
  SiteId site = 0;

  friend bool operator==(const Vote&, const Vote&) = default;
  friend bool operator<(const Vote& a, const Vote& b) {
    return a.weight < b.weight || (a.weight == b.weight && a.site < b.site);
  }
  friend bool operator>(const Vote& a, const Vote& b) { return b < a; }
  friend Vote operator+(const Vote& a, const Vote& b) {
    return {a.weight + b.weight, std::max(a.site, b.site)};
  }
};

/// "2/3@3"
std::string to_string(const Vote& v);
std::optional<Vote> parse_vote(std::string_view text);

struct Proposal {
  Multilog m;
  std::uint64_t ts = 0;
  SiteId proposer = 0;

  bool operator==(const Proposal&) const = default;
};

struct Candidate {
  Multilog x;
  SiteId source = 0;
  std::uint64_t ts = 0;
};

struct OpponentTally {
  Candidate candidate;
  Vote tally;
};

struct ElectionRecord {
  Candidate winner;
  Vote tally;
  Vote cotally;
  /// Largest tally among opponents and candidates incompatible with the winner.
  Vote against;
  std::vector<OpponentTally> opponents;
  std::size_t evaluated = 0;
};

class DuplicateAction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One site's protocol state. Sites are numbered 1..n; per-site tables are
/// indexed by site - 1.
struct SiteState {
  SiteState(SiteId id, std::vector<Weight> weights, std::shared_ptr<const ConstraintOracle> oracle);

  SiteId id;
  Multilog m;
  std::vector<Proposal> proposals;
  std::vector<Weight> weights;
  std::shared_ptr<const ConstraintOracle> oracle;
  std::map<ActionId, Action> known;
  /// Latest knowledge vector heard from each site, own entry included.
  std::vector<VersionVector> acks;
  /// Own recent proposals by timestamp, for rebuilding delta-encoded copies.
  std::map<std::uint64_t, Multilog> history;
  std::uint32_t next_seq = 0;
  std::vector<ActionId> arrival_order;
  std::size_t candidates_evaluated = 0;

  std::size_t sites() const { return weights.size(); }
  Proposal& own() { return proposals[id - 1]; }
  const Proposal& own() const { return proposals[id - 1]; }

  /// Per-site count of contiguously known actions.
  VersionVector knowledge() const;

  struct CacheEntry {
    std::uint64_t ts = 0;
    bool valid = false;
    std::vector<Multilog> candidates;
  };
  std::vector<CacheEntry> candidate_cache;
};

/// A fresh action submitted at this site, stamped with its knowledge.
Action new_action(SiteState& st, std::string label, std::optional<DbPayload> db = std::nullopt);

/// Adds client actions and every oracle constraint between them and the
/// known actions. Throws DuplicateAction for reused ids. Returns true if
/// the site multilog changed.
bool client_actions_constraints(SiteState& st, const std::vector<Action>& batch);

/// Merges a received multilog (with the payloads of its actions), then adds
/// oracle not_after and non_commuting edges between newly known actions and
/// the rest. Returns true if the site multilog changed.
bool receive_and_compare(SiteState& st, const Multilog& in, const std::vector<Action>& actions);

/// Pointwise maximum of knowledge vectors. Returns true on change.
bool merge_acks(SiteState& st, const std::vector<VersionVector>& acks);

/// Replaces each slot holding an older timestamp. Returns true on change.
bool merge_proposals(SiteState& st, const std::vector<Proposal>& incoming);

/// Drops decided actions from the own proposal, restricts its edges to the
/// survivors (edges to the initial action are kept) and clears its
/// non_commuting edges.
void update_proposal(SiteState& st);

/// update_proposal, then a fresh own proposal extending the site multilog
/// and the previous proposal, with a bumped timestamp.
void make_proposal(SiteState& st, const ProposerKind& kind);

/// Safe approximation of eligibility.
bool eligible(const Multilog& x, const SiteState& st);

/// Weight of the sites whose proposal x prefixes.
Vote tally(const Multilog& x, const SiteState& st);
/// Weight of the sites counted neither in tally(x) nor by an opponent:
/// those whose proposal lacks some action of x, and those whose proposal
/// covers x's actions without holding a comparable well-formed prefix.
/// Tally, opponents and cotally thus partition the sites.
Vote cotally(const Multilog& x, const SiteState& st);
std::vector<OpponentTally> opponents(const Multilog& x, const SiteState& st);

/// Distinct candidates: for every proposal, the least well-formed prefix
/// containing each of its actions, plus the whole proposal when it is a
/// well-formed prefix of itself. Smallest first, then canonical.
std::vector<Candidate> extract_candidates(SiteState& st);

/// Runs one election. A candidate X wins when its tally exceeds its
/// cotally plus the largest tally among the opponents and the other
/// candidates whose union with X is unsound.
/// Merges the first winner into the site multilog and returns its record,
/// or nullopt if none wins.
std::optional<ElectionRecord> elect(SiteState& st);

/// Total order used to rank candidates of equal size.
bool canonical_less(const Multilog& a, const Multilog& b);

}  // namespace semcommit
