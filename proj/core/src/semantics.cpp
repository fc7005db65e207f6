#include "semcommit/semantics.hpp"

#include <algorithm>

namespace semcommit {

namespace {

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

OracleEdge make_edge(EdgeKind kind, ActionId from, ActionId to) {
  if (kind == EdgeKind::non_commuting && to < from) std::swap(from, to);
  return {kind, from, to};
}

// Objects t reads and that u overwrites or updates.
bool read_write_overlap(const DbPayload& t, const DbPayload& u) {
  return intersects(t.read_set, u.write_set) || intersects(t.read_set, u.increment_set);
}

// Objects both update, where at least one update is not a commutative
// increment.
bool write_write_overlap(const DbPayload& t, const DbPayload& u) {
  return intersects(t.write_set, u.write_set) || intersects(t.write_set, u.increment_set) ||
         intersects(t.increment_set, u.write_set);
}

// One directed application of the after-values table with (T, T') = (t, u).
void db_rows(const Action& t, const Action& u, std::vector<OracleEdge>& out) {
  const auto& pt = *t.db;
  const auto& pu = *u.db;
  const bool t_first = happens_before(t, u);
  const bool u_first = happens_before(u, t);
  if (read_write_overlap(pt, pu)) {
    if (u_first) {
      out.push_back(make_edge(EdgeKind::not_after, u.id, t.id));
      out.push_back(make_edge(EdgeKind::enables, u.id, t.id));
    } else {
      out.push_back(make_edge(EdgeKind::not_after, t.id, u.id));
    }
  }
  if (write_write_overlap(pt, pu)) {
    if (t_first) {
      out.push_back(make_edge(EdgeKind::not_after, t.id, u.id));
    } else if (u_first) {
      out.push_back(make_edge(EdgeKind::not_after, u.id, t.id));
    } else {
      out.push_back(make_edge(EdgeKind::non_commuting, t.id, u.id));
    }
  }
}

}  // namespace

std::string to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::not_after:
      return "not_after";
    case EdgeKind::enables:
      return "enables";
    case EdgeKind::non_commuting:
      return "non_commuting";
  }
  return "?";
}

std::string to_string(ConstraintOracle::Kind k) {
  switch (k) {
    case ConstraintOracle::Kind::independent:
      return "independent";
    case ConstraintOracle::Kind::calendar:
      return "calendar";
    case ConstraintOracle::Kind::serializable_db:
      return "serializable-db";
  }
  return "?";
}

ConstraintOracle ConstraintOracle::independent() { return {}; }

ConstraintOracle ConstraintOracle::calendar(std::vector<CalendarRule> rules) {
  ConstraintOracle o;
  o.kind_ = Kind::calendar;
  o.rules_ = std::move(rules);
  return o;
}

ConstraintOracle ConstraintOracle::serializable_db() {
  ConstraintOracle o;
  o.kind_ = Kind::serializable_db;
  return o;
}

std::vector<OracleEdge> ConstraintOracle::constraints(const Action& a, const Action& b) const {
  std::vector<OracleEdge> out;
  if (a.id == b.id) return out;
  switch (kind_) {
    case Kind::independent:
      break;
    case Kind::calendar:
      for (const auto& r : rules_) {
        if (r.from == a.label && r.to == b.label) out.push_back(make_edge(r.kind, a.id, b.id));
        if (r.from == b.label && r.to == a.label) out.push_back(make_edge(r.kind, b.id, a.id));
      }
      break;
    case Kind::serializable_db:
      if (a.db && b.db) {
        db_rows(a, b, out);
        db_rows(b, a, out);
      }
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> ConstraintOracle::predecessor_labels(const std::string& label) const {
  std::vector<std::string> out;
  for (const auto& r : rules_) {
    if (r.to == label) out.push_back(r.from);
    if (r.kind == EdgeKind::non_commuting && r.from == label) out.push_back(r.to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void add_edges(Multilog& m, const std::vector<OracleEdge>& edges, bool with_enables) {
  for (const auto& e : edges) {
    switch (e.kind) {
      case EdgeKind::not_after:
        m.add_not_after(e.from, e.to);
        break;
      case EdgeKind::enables:
        if (with_enables) m.add_enables(e.from, e.to);
        break;
      case EdgeKind::non_commuting:
        m.add_non_commuting(e.from, e.to);
        break;
    }
  }
}

}  // namespace semcommit
