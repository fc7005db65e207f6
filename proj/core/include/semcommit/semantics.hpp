#pragma once

#include <compare>
#include <string>
#include <vector>

#include "semcommit/action.hpp"
#include "semcommit/multilog.hpp"

namespace semcommit {

enum class EdgeKind { not_after, enables, non_commuting };

std::string to_string(EdgeKind k);

/// One constraint emitted by an oracle. non_commuting edges are canonical
/// (from < to).
struct OracleEdge {
  EdgeKind kind;
  ActionId from;
  ActionId to;

  auto operator<=>(const OracleEdge&) const = default;
};

/// A calendar rule between action labels: whenever actions carrying both
/// labels are known, the edge from the first to the second applies.
struct CalendarRule {
  EdgeKind kind;
  std::string from;
  std::string to;

  bool operator==(const CalendarRule&) const = default;
};

/// Client constraint oracle: the semantic constraints between two actions.
class ConstraintOracle {
 public:
  enum class Kind { independent, calendar, serializable_db };

  static ConstraintOracle independent();
  static ConstraintOracle calendar(std::vector<CalendarRule> rules);
  static ConstraintOracle serializable_db();

  Kind kind() const { return kind_; }
  const std::vector<CalendarRule>& rules() const { return rules_; }

  /// All edges between a and b, in either direction, sorted. Symmetric in
  /// its arguments. Empty when a and b are the same action.
  std::vector<OracleEdge> constraints(const Action& a, const Action& b) const;

  /// Labels with a calendar rule pointing at `label` (any edge kind).
  std::vector<std::string> predecessor_labels(const std::string& label) const;

 private:
  Kind kind_ = Kind::independent;
  std::vector<CalendarRule> rules_;
};

std::string to_string(ConstraintOracle::Kind k);

/// Adds edges to m. Enables edges are skipped unless `with_enables`.
void add_edges(Multilog& m, const std::vector<OracleEdge>& edges, bool with_enables = true);

}  // namespace semcommit
