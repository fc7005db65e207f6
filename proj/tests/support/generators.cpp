#include "support/generators.hpp"

#include <algorithm>
#include <string>

namespace semcommit::testing {

ActionId nth_action(std::size_t i) {
  return ActionId{static_cast<SiteId>(i % 3 + 1), static_cast<std::uint32_t>(i / 3 + 1)};
}

namespace {

std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

Multilog random_multilog(Rng& rng, const MultilogShape& shape) {
  Multilog m;
  const auto n = below(rng, shape.max_actions + 1);
  for (std::size_t i = 0; i < n; ++i) m.add_action(nth_action(i));
  if (n == 0) return m;
  const auto edges = below(rng, shape.max_edges + 1);
  auto endpoint = [&] {
    return unit(rng) < shape.init_endpoint ? kInit : nth_action(below(rng, n));
  };
  for (std::size_t i = 0; i < edges; ++i) {
    const auto a = endpoint();
    auto b = unit(rng) < shape.self_loop ? a : endpoint();
    switch (below(rng, 3)) {
      case 0:
        m.add_not_after(a, b);
        break;
      case 1:
        m.add_enables(a, b);
        break;
      default:
        if (a != kInit && b != kInit) m.add_non_commuting(a, b);
        break;
    }
  }
  return m;
}

Multilog random_sound_multilog(Rng& rng, const MultilogShape& shape) {
  while (true) {
    auto m = random_multilog(rng, shape);
    if (is_sound(m)) return m;
  }
}

std::vector<std::pair<int, Edge>> all_edge_slots(std::size_t n) {
  std::vector<ActionId> nodes{kInit};
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(nth_action(i));
  std::vector<std::pair<int, Edge>> out;
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      out.push_back({0, Edge{a, b}});
      if (a != b) out.push_back({1, Edge{a, b}});
      if (a < b && a != kInit) out.push_back({2, Edge{a, b}});
    }
  }
  return out;
}

Multilog build_multilog(std::size_t n, const std::vector<std::pair<int, Edge>>& edges) {
  Multilog m;
  for (std::size_t i = 0; i < n; ++i) m.add_action(nth_action(i));
  for (const auto& [kind, e] : edges) {
    if (kind == 0) m.add_not_after(e.from, e.to);
    if (kind == 1) m.add_enables(e.from, e.to);
    if (kind == 2) m.add_non_commuting(e.from, e.to);
  }
  return m;
}

Scenario random_scenario(Rng& rng, const ScenarioShape& shape) {
  Scenario sc;
  sc.sites = shape.min_sites + below(rng, shape.max_sites - shape.min_sites + 1);
  std::vector<std::int64_t> raw;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < sc.sites; ++i) {
    raw.push_back(1 + static_cast<std::int64_t>(below(rng, 4)));
    total += raw.back();
  }
  for (auto w : raw) sc.weights.push_back(Weight(w, total));

  const auto actions = 1 + below(rng, shape.max_actions);
  const bool db = below(rng, 2) == 0;
  const std::vector<std::string> keys{"x", "y", "z", "u", "acct"};
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < actions; ++i) {
    Submission s;
    s.tick = below(rng, 40);
    s.site = static_cast<SiteId>(1 + below(rng, sc.sites));
    s.label = "a" + std::to_string(i);
    if (db) {
      DbPayload p;
      const auto touch = 1 + below(rng, 2);
      for (std::size_t k = 0; k < touch; ++k) {
        const auto& key = keys[below(rng, keys.size())];
        switch (below(rng, 3)) {
          case 0:
            p.read_set.insert(key);
            break;
          case 1:
            p.write_set.insert(key);
            break;
          default:
            p.increment_set.insert(key);
            break;
        }
      }
      s.db = p;
    }
    labels.push_back(s.label);
    sc.submissions.push_back(std::move(s));
  }
  std::stable_sort(sc.submissions.begin(), sc.submissions.end(),
                   [](const Submission& a, const Submission& b) { return a.tick < b.tick; });
  if (db) {
    sc.oracle = ConstraintOracle::serializable_db();
  } else {
    // Rules only between labels whose validity does not depend on timing:
    // enables rules need the enabler submitted at the same site no later.
    std::vector<CalendarRule> rules;
    const auto nrules = below(rng, actions + 1);
    for (std::size_t r = 0; r < nrules; ++r) {
      const auto& a = sc.submissions[below(rng, actions)];
      const auto& b = sc.submissions[below(rng, actions)];
      if (a.label == b.label) continue;
      switch (below(rng, 4)) {
        case 0:
          rules.push_back({EdgeKind::not_after, a.label, b.label});
          break;
        case 1:
          rules.push_back({EdgeKind::not_after, a.label, b.label});
          rules.push_back({EdgeKind::not_after, b.label, a.label});
          break;
        case 2:
          rules.push_back({EdgeKind::non_commuting, a.label, b.label});
          break;
        default:
          if (a.site == b.site && a.tick <= b.tick) {
            rules.push_back({EdgeKind::not_after, a.label, b.label});
            rules.push_back({EdgeKind::enables, a.label, b.label});
          }
          break;
      }
    }
    sc.oracle = ConstraintOracle::calendar(std::move(rules));
  }

  sc.gossip.period = 2 + below(rng, 5);
  sc.gossip.latency = 1 + below(rng, 3);
  sc.gossip.jitter = below(rng, 3);
  sc.gossip.delta = below(rng, 2) == 0;
  sc.faults.drop = unit(rng) * 0.3;
  sc.faults.duplicate = unit(rng) * 0.2;
  sc.faults.reorder = unit(rng) * 0.3;
  const auto crashes = below(rng, 3);
  for (std::size_t c = 0; c < crashes; ++c) {
    Crash cr;
    cr.site = static_cast<SiteId>(1 + below(rng, sc.sites));
    cr.at = below(rng, 80);
    if (shape.fair || below(rng, 3) != 0) cr.duration = 1 + below(rng, 30);
    sc.faults.crashes.push_back(cr);
  }
  if (!shape.fair && below(rng, 4) == 0) sc.faults.drop = 1.0;
  sc.default_proposer = below(rng, 2) == 0 ? ProposerKind{Conservative{}} : Optimizing{};
  sc.seed = rng();
  sc.horizon = shape.fair ? 50000 : 20000;
  return sc;
}

Scenario batch_scenario(std::size_t n, std::size_t per_site, std::size_t d, std::uint64_t seed) {
  Scenario sc;
  sc.sites = n;
  for (std::size_t i = 0; i < n; ++i) sc.weights.push_back(Weight(1, static_cast<std::int64_t>(n)));
  sc.oracle = ConstraintOracle::independent();
  for (std::size_t s = 1; s <= n; ++s) {
    for (std::size_t k = 0; k < per_site; ++k) {
      Submission sub;
      sub.site = static_cast<SiteId>(s);
      // One batch every 200 ticks.
      sub.tick = (k / d) * 200;
      sub.label = "s" + std::to_string(s) + "_" + std::to_string(k);
      sc.submissions.push_back(std::move(sub));
    }
  }
  std::stable_sort(sc.submissions.begin(), sc.submissions.end(),
                   [](const Submission& a, const Submission& b) { return a.tick < b.tick; });
  sc.gossip.period = 4;
  sc.gossip.latency = 1;
  sc.seed = seed;
  sc.default_proposer = Conservative{};
  return sc;
}

}  // namespace semcommit::testing
