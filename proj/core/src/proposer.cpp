#include "semcommit/proposer.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

namespace semcommit {

namespace {

// Adjacency over a multilog's universe, indexed canonically.
struct Index {
  explicit Index(const Multilog& m) {
    const auto u = m.universe();
    ids.assign(u.begin(), u.end());
    na_out.resize(ids.size());
    en_in.resize(ids.size());
    for (const auto& e : m.not_after()) na_out[at(e.from)].push_back(at(e.to));
    for (const auto& e : m.enables()) en_in[at(e.to)].push_back(at(e.from));
  }

  int at(ActionId a) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), a);
    return it != ids.end() && *it == a ? static_cast<int>(it - ids.begin()) : -1;
  }

  std::vector<ActionId> ids;
  std::vector<std::vector<int>> na_out, en_in;
};

// Cycle among the explicit not_after edges restricted to `in`.
bool cyclic(const Index& g, const std::vector<char>& in) {
  const auto n = g.ids.size();
  std::vector<char> color(n, 0);
  std::vector<std::pair<int, std::size_t>> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (!in[s] || color[s]) continue;
    stack.emplace_back(static_cast<int>(s), 0);
    color[s] = 1;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k == g.na_out[v].size()) {
        color[v] = 2;
        stack.pop_back();
        continue;
      }
      const int w = g.na_out[v][k++];
      if (!in[w]) continue;
      if (color[w] == 1) return true;
      if (color[w] == 0) {
        color[w] = 1;
        stack.emplace_back(w, 0);
      }
    }
  }
  return false;
}

// Explicit not_after path from `from` to `to` in m.
bool reaches(const Multilog& m, ActionId from, ActionId to) {
  std::vector<ActionId> stack{from};
  ActionSet seen{from};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    auto it = m.not_after().lower_bound(Edge{v, ActionId{0, 0}});
    for (; it != m.not_after().end() && it->from == v; ++it) {
      if (it->to == to) return true;
      if (seen.insert(it->to).second) stack.push_back(it->to);
    }
  }
  return false;
}

bool ordered(const Multilog& m, ActionId a, ActionId b) {
  return m.has_not_after(a, b) || m.has_not_after(b, a);
}

// Canonical topological order of `members` (indices into g) over explicit
// not_after edges. Precondition: acyclic.
std::vector<int> topo_order(const Index& g, const std::vector<char>& members) {
  const auto n = g.ids.size();
  std::vector<int> indegree(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!members[v]) continue;
    for (int w : g.na_out[v])
      if (members[w] && w != static_cast<int>(v)) ++indegree[w];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (members[v] && indegree[v] == 0) ready.push(static_cast<int>(v));
  std::vector<int> out;
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    out.push_back(v);
    for (int w : g.na_out[v])
      if (members[w] && w != v && --indegree[w] == 0) ready.push(w);
  }
  return out;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

// Depth-first include/exclude search over one group of undecided actions.
class Search {
 public:
  Search(const Index& g, std::vector<char> base, const std::vector<int>& order,
         const std::vector<char>& forbidden, std::size_t budget)
      : g_(g), in_(std::move(base)), order_(order), forbidden_(forbidden), budget_(budget),
        excluded_(g.ids.size(), 0) {}

  // Returns the chosen alive set and whether the search completed.
  std::pair<std::vector<int>, bool> run() {
    step(0, 0);
    return {best_set_, !exhausted_};
  }

 private:
  int remaining(std::size_t i) const {
    int r = 0;
    for (std::size_t j = i; j < order_.size(); ++j)
      if (!in_[order_[j]] && !excluded_[order_[j]] && !forbidden_[order_[j]]) ++r;
    return r;
  }

  // v plus its not-yet-included enables ancestors, or empty if one of them
  // is excluded or forbidden.
  std::vector<int> closure(int v) const {
    std::vector<int> out{v};
    std::vector<char> seen(g_.ids.size(), 0);
    seen[v] = 1;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const int x = out[k];
      if (excluded_[x] || forbidden_[x]) return {};
      for (int p : g_.en_in[x]) {
        if (in_[p] || seen[p]) continue;
        seen[p] = 1;
        out.push_back(p);
      }
    }
    return out;
  }

  void step(std::size_t i, int count) {
    if (exhausted_) return;
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return;
    }
    if (count + remaining(i) <= best_) return;
    if (i == order_.size()) {
      best_ = count;
      best_set_.clear();
      for (int v : order_)
        if (in_[v]) best_set_.push_back(v);
      return;
    }
    const int v = order_[i];
    if (in_[v] || forbidden_[v]) {
      step(i + 1, count);
      return;
    }
    auto add = closure(v);
    if (!add.empty()) {
      for (int x : add) in_[x] = 1;
      if (!cyclic(g_, in_)) step(i + 1, count + static_cast<int>(add.size()));
      for (int x : add) in_[x] = 0;
    }
    excluded_[v] = 1;
    step(i + 1, count);
    excluded_[v] = 0;
  }

  const Index& g_;
  std::vector<char> in_;
  const std::vector<int>& order_;
  const std::vector<char>& forbidden_;
  std::size_t budget_;
  std::vector<char> excluded_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
  int best_ = -1;
  std::vector<int> best_set_;
};

}  // namespace

std::string to_string(const ProposerKind& p) {
  if (const auto* c = std::get_if<Conservative>(&p)) {
    if (c->order.empty()) return "conservative";
    std::ostringstream out;
    out << "conservative order=";
    for (std::size_t i = 0; i < c->order.size(); ++i)
      out << (i ? "," : "") << to_string(c->order[i]);
    return out.str();
  }
  return "optimizing budget=" + std::to_string(std::get<Optimizing>(p).budget);
}

RequirementReport check_proposal_requirements(const Multilog& input, const Multilog& output) {
  RequirementReport r;
  if (!input.subset_of(output)) r.violations.push_back("output does not extend its input");
  if (input.actions() != output.actions()) r.violations.push_back("may not add actions");
  for (const auto& e : output.not_after()) {
    if (input.has_not_after(e.from, e.to) || e.from == e.to ||
        input.has_non_commuting(e.from, e.to))
      continue;
    r.violations.push_back("not_after " + to_string(e.from) + ">" + to_string(e.to) +
                           " is not a decision");
  }
  for (const auto& e : output.enables()) {
    if (input.has_enables(e.from, e.to) || e.to == kInit) continue;
    r.violations.push_back("enables " + to_string(e.from) + ">" + to_string(e.to) +
                           " is not a decision");
  }
  if (input.non_commuting() != output.non_commuting())
    r.violations.push_back("non_commuting changed");
  if (!is_sound(output)) r.violations.push_back("output is unsound");
  const auto stable = classify(output).stable;
  for (const auto& a : output.actions()) {
    if (!stable.contains(a)) r.violations.push_back("action " + to_string(a) + " is not stable");
  }
  return r;
}

Multilog propose_conservative(const Multilog& m, std::span<const ActionId> order) {
  if (!is_sound(m)) throw UnsoundInput("proposer input is unsound");
  std::vector<ActionId> seq;
  for (const auto& a : order)
    if (m.actions().contains(a) && std::find(seq.begin(), seq.end(), a) == seq.end())
      seq.push_back(a);
  for (const auto& a : m.actions())
    if (std::find(seq.begin(), seq.end(), a) == seq.end()) seq.push_back(a);

  Multilog out = m;
  auto known = [&](ActionId a) { return out.contains(a); };
  for (const auto& b : seq) {
    for (const auto& e : m.non_commuting()) {
      if (e.from != b && e.to != b) continue;
      const auto c = e.from == b ? e.to : e.from;
      if (ordered(out, b, c)) continue;
      if (reaches(out, c, b)) {
        out.add_not_after(c, b);
      } else {
        out.add_not_after(b, c);
      }
    }
    if (out.has_not_after(b, b)) continue;
    const auto g = guaranteed(out);
    if (g.contains(b)) continue;
    bool kill = false;
    for (const auto& e : out.not_after()) {
      if (e.from == b && g.contains(e.to)) kill = true;
      if (e.to == b && !known(e.from)) kill = true;
    }
    for (const auto& e : out.enables())
      if (e.to == b && !g.contains(e.from)) kill = true;
    if (kill) {
      out.add_not_after(b, b);
    } else {
      out.add_enables(b, kInit);
    }
  }
  return out;
}

Multilog propose_optimizing(const Multilog& m, std::size_t budget, SiteId preferred_site) {
  if (!is_sound(m)) throw UnsoundInput("proposer input is unsound");
  const auto cls = classify(m);
  const Index g(m);
  const auto n = g.ids.size();

  std::vector<char> base(n, 0), undecided(n, 0), forbidden(n, 0);
  for (const auto& a : cls.guaranteed) base[g.at(a)] = 1;
  for (const auto& a : m.actions()) {
    if (cls.guaranteed.contains(a) || cls.dead.contains(a)) continue;
    undecided[g.at(a)] = 1;
  }
  // An action with a predecessor outside the multilog can never be stable
  // unless dead.
  for (std::size_t v = 0; v < n; ++v) {
    if (!undecided[v]) continue;
    for (int p : g.en_in[v])
      if (!m.contains(g.ids[p]) || cls.dead.contains(g.ids[p])) forbidden[v] = 1;
  }
  for (const auto& e : m.not_after()) {
    const int t = g.at(e.to);
    if (undecided[t] && !m.contains(e.from)) forbidden[t] = 1;
  }

  // Independent groups: linked by a direct edge, or by a not_after path
  // through guaranteed actions.
  UnionFind uf(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!undecided[v]) continue;
    for (int p : g.en_in[v])
      if (undecided[p]) uf.join(static_cast<int>(v), p);
    std::vector<int> stack{static_cast<int>(v)};
    std::vector<char> seen(n, 0);
    seen[v] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int w : g.na_out[x]) {
        if (seen[w]) continue;
        seen[w] = 1;
        if (undecided[w]) {
          uf.join(static_cast<int>(v), w);
        } else if (base[w]) {
          stack.push_back(w);
        }
      }
    }
  }

  std::vector<char> fallback(n, 0);
  bool have_fallback = false;
  auto load_fallback = [&] {
    if (have_fallback) return;
    have_fallback = true;
    for (const auto& a : guaranteed(propose_conservative(m)))
      if (undecided[g.at(a)]) fallback[g.at(a)] = 1;
  };

  std::vector<char> alive(n, 0);
  std::vector<std::vector<int>> groups(n);
  for (std::size_t v = 0; v < n; ++v)
    if (undecided[v]) groups[uf.find(static_cast<int>(v))].push_back(static_cast<int>(v));
  for (auto& group : groups) {
    if (group.empty()) continue;
    std::stable_sort(group.begin(), group.end(), [&](int a, int b) {
      return (g.ids[a].site != preferred_site) < (g.ids[b].site != preferred_site);
    });
    Search search(g, base, group, forbidden, budget);
    auto [chosen, complete] = search.run();
    if (!complete) {
      load_fallback();
      std::size_t conservative_count = 0;
      for (int v : group) conservative_count += fallback[v];
      if (chosen.size() < conservative_count) {
        chosen.clear();
        for (int v : group)
          if (fallback[v]) chosen.push_back(v);
      }
    }
    for (int v : chosen) alive[v] = 1;
  }

  Multilog out = m;
  std::vector<Decision> decisions;
  for (std::size_t v = 0; v < n; ++v) {
    if (!undecided[v]) continue;
    if (alive[v]) {
      decisions.push_back(Guarantee{g.ids[v]});
    } else {
      decisions.push_back(Kill{g.ids[v]});
    }
    out = apply_decision(std::move(out), decisions.back());
  }

  std::vector<char> members = base;
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v]) members[v] = 1;
  const auto topo = topo_order(g, members);
  std::vector<int> position(n, -1);
  for (std::size_t i = 0; i < topo.size(); ++i) position[topo[i]] = static_cast<int>(i);
  for (const auto& e : m.non_commuting()) {
    if (ordered(out, e.from, e.to)) continue;
    const int a = g.at(e.from);
    const int b = g.at(e.to);
    if (members[a] && members[b]) {
      if (position[a] < position[b]) {
        out.add_not_after(e.from, e.to);
      } else {
        out.add_not_after(e.to, e.from);
      }
    } else if (members[a] && !m.contains(e.to)) {
      out.add_not_after(e.from, e.to);
    } else if (members[b] && !m.contains(e.from)) {
      out.add_not_after(e.to, e.from);
    }
  }

  return prune_redundant_decisions(m, std::move(out));
}

Multilog propose(const Multilog& m, const ProposerKind& p, SiteId self) {
  if (const auto* c = std::get_if<Conservative>(&p)) return propose_conservative(m, c->order);
  return propose_optimizing(m, std::get<Optimizing>(p).budget, self);
}

Multilog prune_redundant_decisions(const Multilog& base, Multilog proposal) {
  std::vector<Edge> removable;
  for (const auto& e : proposal.enables())
    if (e.to == kInit && !base.has_enables(e.from, e.to)) removable.push_back(e);
  for (const auto& e : proposal.not_after())
    if (e.from == e.to && !base.has_not_after(e.from, e.to)) removable.push_back(e);
  if (removable.empty()) return proposal;
  std::sort(removable.begin(), removable.end());
  const auto target = classify(proposal);
  for (const auto& e : removable) {
    Multilog trial = proposal;
    if (e.to == kInit && e.from != kInit) {
      trial.mutable_enables().erase(e);
    } else {
      trial.mutable_not_after().erase(e);
    }
    const auto c = classify(trial);
    if (c.guaranteed == target.guaranteed && c.dead == target.dead) proposal = std::move(trial);
  }
  return proposal;
}

}  // namespace semcommit
