#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/container/flat_set.hpp>

#include "semcommit/action.hpp"

namespace semcommit {

using ActionSet = boost::container::flat_set<ActionId>;

/// A directed constraint edge. For NonCommuting edges `from < to` always
/// holds (the relation is symmetric and stored once).
struct Edge {
  ActionId from;
  ActionId to;

  auto operator<=>(const Edge&) const = default;
};

using EdgeSet = boost::container::flat_set<Edge>;

/// A site's knowledge: actions plus NotAfter, Enables and NonCommuting
/// constraints.
///
/// The initial action is an implicit member of every multilog. It is never
/// stored in `actions()` but `contains(kInit)` is always true, and edges may
/// name it (a guarantee decision is `enables(a, kInit)`).
///
/// Edge endpoints need not be members: a constraint may arrive before the
/// action it mentions. `universe()` is the actions plus every endpoint.
class Multilog {
 public:
  Multilog() = default;

  void add_action(ActionId a);
  /// not_after(a, b): if both run, a runs first. a == b kills a.
  void add_not_after(ActionId a, ActionId b);
  /// enables(a, b): any schedule containing b contains a. Reflexive
  /// edges are implicit and ignored.
  void add_enables(ActionId a, ActionId b);
  /// Symmetric; self pairs are ignored.
  void add_non_commuting(ActionId a, ActionId b);

  bool contains(ActionId a) const { return a == kInit || actions_.contains(a); }
  bool has_not_after(ActionId a, ActionId b) const { return not_after_.contains(Edge{a, b}); }
  bool has_enables(ActionId a, ActionId b) const {
    return a == b || enables_.contains(Edge{a, b});
  }
  bool has_non_commuting(ActionId a, ActionId b) const;

  const ActionSet& actions() const { return actions_; }
  const EdgeSet& not_after() const { return not_after_; }
  const EdgeSet& enables() const { return enables_; }
  const EdgeSet& non_commuting() const { return non_commuting_; }

  /// Actions and edge endpoints, always including kInit.
  ActionSet universe() const;

  bool empty() const {
    return actions_.empty() && not_after_.empty() && enables_.empty() && non_commuting_.empty();
  }
  std::size_t edge_count() const {
    return not_after_.size() + enables_.size() + non_commuting_.size();
  }

  /// Componentwise inclusion.
  bool subset_of(const Multilog& other) const;

  /// Componentwise union, in place. Returns true if anything was added.
  bool merge(const Multilog& other);

  /// The induced sub-multilog: actions in `keep`, and the edges whose both
  /// endpoints are in `keep` or are kInit.
  Multilog restricted_to(const ActionSet& keep) const;

  /// Componentwise difference.
  Multilog minus(const Multilog& other) const;

  bool operator==(const Multilog&) const = default;

  // Direct access for algorithms that rebuild edge sets wholesale.
  EdgeSet& mutable_not_after() { return not_after_; }
  EdgeSet& mutable_enables() { return enables_; }
  EdgeSet& mutable_non_commuting() { return non_commuting_; }
  ActionSet& mutable_actions() { return actions_; }

 private:
  ActionSet actions_;
  EdgeSet not_after_;
  EdgeSet enables_;
  EdgeSet non_commuting_;
};

Multilog union_of(const Multilog& a, const Multilog& b);

/// `{K:1.1,1.2;NA:1.1>1.2;EN:1.1>1.2;NC:}`. Contains no whitespace.
std::string to_string(const Multilog& m);
std::optional<Multilog> parse_multilog(std::string_view text);

/// An ordered sequence of distinct actions starting with kInit.
using Schedule = std::vector<ActionId>;

std::string to_string(const Schedule& s);
std::optional<Schedule> parse_schedule(std::string_view text);

/// The five action classes of a multilog.
struct ActionClassification {
  ActionSet guaranteed;
  ActionSet dead;
  ActionSet serialised;
  ActionSet decided;
  ActionSet stable;
};

/// Actions present in every sound schedule: kInit and everything that
/// reaches it through enables edges.
ActionSet guaranteed(const Multilog& m);

/// Actions present in no sound schedule. An action is dead when the set of
/// actions any schedule containing it must also contain (its enables
/// ancestors plus the guaranteed actions) cannot be ordered: it has a
/// not_after cycle, counting the implicit edges from kInit to every other
/// action. This subsumes the cycle-through-guaranteed and dead-enabler rules.
ActionSet dead(const Multilog& m);

ActionSet serialised(const Multilog& m);
ActionClassification classify(const Multilog& m);

/// A multilog is sound iff no guaranteed action is dead.
bool is_sound(const Multilog& m);

bool is_sound_schedule(const Schedule& s, const Multilog& m);

/// Well-formed prefix: x is a sub-multilog of m, its actions are exactly its
/// stable actions, it holds every m-edge into its actions, and its own edges
/// stay within its actions (kInit included).
bool is_wf_prefix(const Multilog& x, const Multilog& m);

/// Caches the parts of the well-formed-prefix test that depend only on the
/// candidate, for testing one candidate against many multilogs.
class PrefixTester {
 public:
  explicit PrefixTester(const Multilog& x);

  const Multilog& candidate() const { return x_; }
  /// Stable and edge-closed on its own.
  bool self_consistent() const { return self_ok_; }
  bool prefixes(const Multilog& m) const;

 private:
  const Multilog& x_;
  bool self_ok_;
};

/// The least well-formed prefix of m containing `a`, if any.
std::optional<Multilog> minimal_prefix_containing(const Multilog& m, ActionId a);

/// True iff m has no well-formed prefix other than the empty multilog and
/// m itself.
bool is_minimal(const Multilog& m);

struct Guarantee {
  ActionId action;
};
struct Kill {
  ActionId action;
};
struct SerialiseBefore {
  ActionId first;
  ActionId second;
};
using Decision = std::variant<Guarantee, Kill, SerialiseBefore>;

/// m plus the single edge that realises the decision.
Multilog apply_decision(Multilog m, const Decision& d);

std::string to_string(const ActionSet& s);

}  // namespace semcommit
