#include "semcommit/schedule.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>

namespace semcommit {

namespace {

// Kahn's algorithm over the not_after edges among `members`, smallest
// canonical id first. kInit is placed first. nullopt on a cycle.
std::optional<Schedule> canonical_topological_order(const Multilog& m, const ActionSet& members) {
  std::vector<ActionId> ids(members.begin(), members.end());
  if (ids.empty() || ids.front() != kInit) ids.insert(ids.begin(), kInit);
  const auto n = ids.size();
  auto index = [&](ActionId a) {
    auto it = std::lower_bound(ids.begin(), ids.end(), a);
    return it != ids.end() && *it == a ? static_cast<int>(it - ids.begin()) : -1;
  };
  std::vector<std::vector<int>> out(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : m.not_after()) {
    const int a = index(e.from);
    const int b = index(e.to);
    if (a < 0 || b < 0) continue;
    if (a == b) return std::nullopt;
    if (b == 0) return std::nullopt;  // nothing may precede kInit
    out[a].push_back(b);
    ++indegree[b];
  }
  if (indegree[0] != 0) return std::nullopt;
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  ready.push(0);
  Schedule order;
  std::vector<char> queued(n, 0);
  queued[0] = 1;
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(ids[v]);
    for (int w : out[v]) {
      if (--indegree[w] == 0 && !queued[w]) {
        queued[w] = 1;
        ready.push(w);
      }
    }
    if (v == 0) {
      for (std::size_t w = 1; w < n; ++w) {
        if (indegree[w] == 0 && !queued[w]) {
          queued[w] = 1;
          ready.push(static_cast<int>(w));
        }
      }
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

Schedule greedy_schedule(const Multilog& m, std::span<const ActionId> preferred) {
  const auto cls = classify(m);
  auto base = canonical_topological_order(m, cls.guaranteed);
  if (!base) throw UnsoundMultilog("guaranteed actions cannot be ordered");
  Schedule s = std::move(*base);
  ActionSet placed(s.begin(), s.end());

  std::vector<ActionId> order;
  for (const auto& a : preferred)
    if (m.actions().contains(a)) order.push_back(a);
  for (const auto& a : m.actions())
    if (std::find(order.begin(), order.end(), a) == order.end()) order.push_back(a);

  auto can_append = [&](ActionId b) {
    if (placed.contains(b) || cls.dead.contains(b)) return false;
    for (const auto& e : m.enables())
      if (e.to == b && !placed.contains(e.from)) return false;
    for (const auto& e : m.not_after())
      if (e.from == b && (e.to == b || placed.contains(e.to))) return false;
    return true;
  };
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& b : order) {
      if (can_append(b)) {
        s.push_back(b);
        placed.insert(b);
        progress = true;
      }
    }
  }
  return s;
}

Schedule maximal_schedule(const Multilog& m) {
  const auto cls = classify(m);
  std::vector<ActionId> optional_actions;
  for (const auto& a : m.actions())
    if (!cls.guaranteed.contains(a) && !cls.dead.contains(a)) optional_actions.push_back(a);
  const auto count = optional_actions.size();

  std::optional<std::vector<ActionId>> best;
  Schedule best_order;
  for (std::uint32_t mask = 0; mask < (1u << count); ++mask) {
    ActionSet members = cls.guaranteed;
    for (std::size_t i = 0; i < count; ++i)
      if (mask & (1u << i)) members.insert(optional_actions[i]);
    bool closed = true;
    for (const auto& e : m.enables())
      if (members.contains(e.to) && !members.contains(e.from)) closed = false;
    if (!closed) continue;
    auto order = canonical_topological_order(m, members);
    if (!order) continue;
    std::vector<ActionId> key(members.begin(), members.end());
    if (!best || key.size() > best->size() || (key.size() == best->size() && key < *best)) {
      best = std::move(key);
      best_order = std::move(*order);
    }
  }
  if (!best) throw UnsoundMultilog("no sound schedule");
  return best_order;
}

}  // namespace

void for_each_sound_schedule(const Multilog& m, std::size_t max_actions,
                             const std::function<void(const Schedule&)>& visit) {
  const auto universe = m.universe();
  const auto limit = std::min(max_actions, kMaxEnumeratedActions);
  if (universe.size() - 1 > limit) {
    throw UniverseTooLarge("universe of " + std::to_string(universe.size() - 1) +
                           " actions exceeds enumeration limit " + std::to_string(limit));
  }
  // Vertex 0 is kInit; the others are the members of K.
  std::vector<ActionId> ids{kInit};
  for (const auto& a : m.actions()) ids.push_back(a);
  const auto n = ids.size();
  auto index = [&](ActionId a) {
    auto it = std::find(ids.begin(), ids.end(), a);
    return it == ids.end() ? -1 : static_cast<int>(it - ids.begin());
  };

  std::vector<std::uint32_t> must_precede(n, 0);  // bits b with not_after(v, b)
  std::vector<std::uint32_t> enablers(n, 0);
  std::vector<char> impossible(n, 0);
  for (const auto& e : m.not_after()) {
    const int a = index(e.from);
    const int b = index(e.to);
    if (a < 0) continue;
    if (b < 0) continue;
    if (a == b) impossible[a] = 1;
    must_precede[a] |= 1u << b;
  }
  for (const auto& e : m.enables()) {
    const int a = index(e.from);
    const int b = index(e.to);
    if (b < 0) continue;
    if (a < 0) {
      impossible[b] = 1;  // requires an action that can never be scheduled
      continue;
    }
    enablers[b] |= 1u << a;
  }
  if (impossible[0] || (must_precede[0] & 1u)) return;

  Schedule current{kInit};
  std::function<void(std::uint32_t, std::uint32_t)> extend = [&](std::uint32_t placed,
                                                               std::uint32_t required) {
    if ((required & ~placed) == 0) visit(current);
    for (std::size_t v = 1; v < n; ++v) {
      const auto bit = 1u << v;
      if ((placed & bit) || impossible[v]) continue;
      if (must_precede[v] & placed) continue;
      current.push_back(ids[v]);
      extend(placed | bit, required | enablers[v]);
      current.pop_back();
    }
  };
  extend(1u, enablers[0]);
}

std::vector<Schedule> enumerate_sound_schedules(const Multilog& m, std::size_t max_actions) {
  std::vector<Schedule> out;
  for_each_sound_schedule(m, max_actions, [&](const Schedule& s) { out.push_back(s); });
  std::sort(out.begin(), out.end());
  return out;
}

Schedule choose_site_schedule(const Multilog& m, SchedulePolicy policy,
                              std::span<const ActionId> arrival_order) {
  if (!is_sound(m)) throw UnsoundMultilog("site multilog is unsound");
  switch (policy) {
    case SchedulePolicy::maximize_actions:
      if (m.actions().size() <= kMaxEnumeratedActions) return maximal_schedule(m);
      return greedy_schedule(m, {});
    case SchedulePolicy::submission_order:
      return greedy_schedule(m, arrival_order);
    case SchedulePolicy::canonical_greedy:
      break;
  }
  return greedy_schedule(m, {});
}

}  // namespace semcommit
