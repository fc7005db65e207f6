#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace semcommit {

/// Site identifiers are 1-based; 0 is reserved for the initial action and
/// for the identity vote.
using SiteId = std::uint32_t;

/// Globally unique action identifier: (submitting site, per-site sequence).
struct ActionId {
  SiteId site = 0;
  std::uint32_t seq = 0;

  auto operator<=>(const ActionId&) const = default;
};

/// The distinguished initial action. It is canonically smallest.
inline constexpr ActionId kInit{0, 0};

std::string to_string(ActionId id);
std::optional<ActionId> parse_action_id(std::string_view text);

/// Per-site knowledge counters. Knowledge of each site's actions is
/// prefix-closed, so a single counter per site suffices.
class VersionVector {
 public:
  std::uint32_t get(SiteId site) const;
  void set(SiteId site, std::uint32_t count);
  void observe(ActionId id);
  void merge(const VersionVector& other);

  /// True if the action is included in this knowledge.
  bool covers(ActionId id) const { return id == kInit || get(id.site) >= id.seq; }

  const std::map<SiteId, std::uint32_t>& entries() const { return counts_; }

  bool operator==(const VersionVector&) const = default;

 private:
  std::map<SiteId, std::uint32_t> counts_;
};

std::string to_string(const VersionVector& vv);

/// Read/write footprint of a database transaction. Objects in
/// `increment_set` receive commutative updates: two increments of the same
/// object commute, but an increment conflicts with a read or write of it.
struct DbPayload {
  std::set<std::string> read_set;
  std::set<std::string> write_set;
  std::set<std::string> increment_set;

  bool operator==(const DbPayload&) const = default;
};

/// An immutable client action. `submit_vv` is the submitting site's
/// knowledge at submission time and determines happens-before.
struct Action {
  ActionId id;
  std::string label;
  std::optional<DbPayload> db;
  VersionVector submit_vv;

  bool operator==(const Action&) const = default;
};

/// Lamport happens-before between two submitted actions.
bool happens_before(const Action& a, const Action& b);
bool concurrent(const Action& a, const Action& b);

}  // namespace semcommit
