#include "semcommit/multilog.hpp"

#include <algorithm>
#include <sstream>

namespace semcommit {

namespace {

Edge canonical_pair(ActionId a, ActionId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

template <typename Set>
bool merge_into(Set& into, const Set& from) {
  const auto before = into.size();
  into.insert(boost::container::ordered_unique_range, from.begin(), from.end());
  return into.size() != before;
}

// Dense index over a multilog's universe; kInit is always vertex 0.
class Graph {
 public:
  explicit Graph(const Multilog& m) {
    const auto u = m.universe();
    ids_.assign(u.begin(), u.end());
    const auto n = ids_.size();
    na_out.resize(n);
    na_in.resize(n);
    en_in.resize(n);
    en_out.resize(n);
    nc.resize(n);
    member.assign(n, 0);
    member[0] = 1;
    for (const auto& a : m.actions()) member[index(a)] = 1;
    for (const auto& e : m.not_after()) {
      na_out[index(e.from)].push_back(index(e.to));
      na_in[index(e.to)].push_back(index(e.from));
    }
    for (const auto& e : m.enables()) {
      en_out[index(e.from)].push_back(index(e.to));
      en_in[index(e.to)].push_back(index(e.from));
    }
    for (const auto& e : m.non_commuting()) {
      nc[index(e.from)].push_back(index(e.to));
      nc[index(e.to)].push_back(index(e.from));
    }
  }

  std::size_t size() const { return ids_.size(); }
  ActionId id(std::size_t i) const { return ids_[i]; }
  int index(ActionId a) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), a);
    return it != ids_.end() && *it == a ? static_cast<int>(it - ids_.begin()) : -1;
  }

  ActionSet to_set(const std::vector<char>& bits) const {
    std::vector<ActionId> out;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) out.push_back(ids_[i]);
    return ActionSet(boost::container::ordered_unique_range, out.begin(), out.end());
  }

  std::vector<std::vector<int>> na_out, na_in, en_in, en_out, nc;
  std::vector<char> member;

 private:
  std::vector<ActionId> ids_;
};

// Closure of `bits` under enables predecessors.
void close_under_enablers(const Graph& g, std::vector<char>& bits) {
  std::vector<int> stack;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (bits[i]) stack.push_back(static_cast<int>(i));
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : g.en_in[v]) {
      if (!bits[p]) {
        bits[p] = 1;
        stack.push_back(p);
      }
    }
  }
}

std::vector<char> guaranteed_bits(const Graph& g) {
  std::vector<char> bits(g.size(), 0);
  bits[0] = 1;
  close_under_enablers(g, bits);
  return bits;
}

// Does the not_after graph restricted to `in` (plus the implicit edges from
// kInit to every other vertex) contain a cycle?
bool has_order_cycle(const Graph& g, const std::vector<char>& in) {
  const auto n = g.size();
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<char> color(n, 0);
  struct Frame {
    int v;
    std::size_t next;
  };
  auto neighbour = [&](int v, std::size_t k, int& out) -> bool {
    // Vertex 0 first walks its implicit edges, then its explicit ones.
    if (v == 0) {
      if (k < n) {
        out = static_cast<int>(k);
        return true;
      }
      k -= n;
    }
    if (k < g.na_out[v].size()) {
      out = g.na_out[v][k];
      return true;
    }
    return false;
  };
  std::vector<Frame> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (!in[s] || color[s]) continue;
    stack.push_back({static_cast<int>(s), 0});
    color[s] = 1;
    while (!stack.empty()) {
      auto& f = stack.back();
      int w = -1;
      if (!neighbour(f.v, f.next++, w)) {
        color[f.v] = 2;
        stack.pop_back();
        continue;
      }
      if (!in[w]) continue;
      if (f.v == 0 && w == 0 && f.next <= n) continue;  // no implicit self edge
      if (color[w] == 1) return true;
      if (color[w] == 0) {
        color[w] = 1;
        stack.push_back({w, 0});
      }
    }
  }
  return false;
}

std::vector<char> dead_bits(const Graph& g, const std::vector<char>& guar) {
  const auto n = g.size();
  std::vector<char> out(n, 0);
  if (has_order_cycle(g, guar)) {
    std::fill(out.begin(), out.end(), 1);
    return out;
  }
  std::vector<char> forced;
  for (std::size_t v = 0; v < n; ++v) {
    if (guar[v]) continue;
    forced = guar;
    forced[v] = 1;
    close_under_enablers(g, forced);
    if (has_order_cycle(g, forced)) out[v] = 1;
  }
  return out;
}

std::vector<char> serialised_bits(const Graph& g, const Multilog& m, const std::vector<char>& dead) {
  std::vector<char> out(g.size(), 0);
  for (std::size_t a = 0; a < g.size(); ++a) {
    if (!g.member[a]) continue;
    bool ok = true;
    for (int b : g.nc[a]) {
      const auto ia = g.id(a);
      const auto ib = g.id(b);
      if (m.has_not_after(ia, ib) || m.has_not_after(ib, ia) || dead[a] || dead[b]) continue;
      ok = false;
      break;
    }
    out[a] = ok;
  }
  return out;
}

// Greatest set T with T = dead ∪ {a ∈ guaranteed ∩ serialised | preds(a) ⊆ T}.
std::vector<char> stable_bits(const Graph& g, const std::vector<char>& decided,
                              const std::vector<char>& dead) {
  auto t = decided;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (!t[v] || dead[v]) continue;
      auto unstable_pred = [&](const std::vector<int>& preds) {
        return std::any_of(preds.begin(), preds.end(),
                           [&](int p) { return p != static_cast<int>(v) && !t[p]; });
      };
      if (unstable_pred(g.na_in[v]) || unstable_pred(g.en_in[v])) {
        t[v] = 0;
        changed = true;
      }
    }
  }
  return t;
}

struct Bits {
  std::vector<char> guaranteed, dead, serialised, decided, stable;
};

Bits classify_bits(const Graph& g, const Multilog& m) {
  Bits b;
  b.guaranteed = guaranteed_bits(g);
  b.dead = dead_bits(g, b.guaranteed);
  b.serialised = serialised_bits(g, m, b.dead);
  b.decided.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    b.decided[i] = b.dead[i] || (b.guaranteed[i] && b.serialised[i]);
  b.stable = stable_bits(g, b.decided, b.dead);
  return b;
}

void write_ids(std::ostringstream& out, const ActionSet& s) {
  bool first = true;
  for (const auto& a : s) {
    if (!first) out << ',';
    first = false;
    out << to_string(a);
  }
}

void write_edges(std::ostringstream& out, const EdgeSet& s) {
  bool first = true;
  for (const auto& e : s) {
    if (!first) out << ',';
    first = false;
    out << to_string(e.from) << '>' << to_string(e.to);
  }
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  if (text.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::optional<EdgeSet> parse_edges(std::string_view text) {
  EdgeSet out;
  for (auto item : split(text, ',')) {
    const auto gt = item.find('>');
    if (gt == std::string_view::npos) return std::nullopt;
    auto a = parse_action_id(item.substr(0, gt));
    auto b = parse_action_id(item.substr(gt + 1));
    if (!a || !b) return std::nullopt;
    out.insert(Edge{*a, *b});
  }
  return out;
}

}  // namespace

void Multilog::add_action(ActionId a) {
  if (a != kInit) actions_.insert(a);
}

void Multilog::add_not_after(ActionId a, ActionId b) { not_after_.insert(Edge{a, b}); }

void Multilog::add_enables(ActionId a, ActionId b) {
  if (a != b) enables_.insert(Edge{a, b});
}

void Multilog::add_non_commuting(ActionId a, ActionId b) {
  if (a != b) non_commuting_.insert(canonical_pair(a, b));
}

bool Multilog::has_non_commuting(ActionId a, ActionId b) const {
  return a != b && non_commuting_.contains(canonical_pair(a, b));
}

ActionSet Multilog::universe() const {
  std::vector<ActionId> ids(actions_.begin(), actions_.end());
  ids.push_back(kInit);
  for (const auto* set : {&not_after_, &enables_, &non_commuting_}) {
    for (const auto& e : *set) {
      ids.push_back(e.from);
      ids.push_back(e.to);
    }
  }
  return ActionSet(ids.begin(), ids.end());
}

bool Multilog::subset_of(const Multilog& other) const {
  return std::includes(other.actions_.begin(), other.actions_.end(), actions_.begin(),
                       actions_.end()) &&
         std::includes(other.not_after_.begin(), other.not_after_.end(), not_after_.begin(),
                       not_after_.end()) &&
         std::includes(other.enables_.begin(), other.enables_.end(), enables_.begin(),
                       enables_.end()) &&
         std::includes(other.non_commuting_.begin(), other.non_commuting_.end(),
                       non_commuting_.begin(), non_commuting_.end());
}

bool Multilog::merge(const Multilog& other) {
  bool changed = merge_into(actions_, other.actions_);
  changed |= merge_into(not_after_, other.not_after_);
  changed |= merge_into(enables_, other.enables_);
  changed |= merge_into(non_commuting_, other.non_commuting_);
  return changed;
}

Multilog Multilog::restricted_to(const ActionSet& keep) const {
  Multilog out;
  auto kept = [&](ActionId a) { return a == kInit || keep.contains(a); };
  for (const auto& a : actions_)
    if (keep.contains(a)) out.actions_.insert(out.actions_.end(), a);
  auto filter = [&](const EdgeSet& from, EdgeSet& to) {
    for (const auto& e : from)
      if (kept(e.from) && kept(e.to)) to.insert(to.end(), e);
  };
  filter(not_after_, out.not_after_);
  filter(enables_, out.enables_);
  filter(non_commuting_, out.non_commuting_);
  return out;
}

Multilog Multilog::minus(const Multilog& other) const {
  Multilog out;
  auto diff = [](const auto& a, const auto& b, auto& into) {
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(into, into.end()));
  };
  diff(actions_, other.actions_, out.actions_);
  diff(not_after_, other.not_after_, out.not_after_);
  diff(enables_, other.enables_, out.enables_);
  diff(non_commuting_, other.non_commuting_, out.non_commuting_);
  return out;
}

Multilog union_of(const Multilog& a, const Multilog& b) {
  Multilog out = a;
  out.merge(b);
  return out;
}

std::string to_string(const ActionSet& s) {
  std::ostringstream out;
  out << '{';
  write_ids(out, s);
  out << '}';
  return out.str();
}

std::string to_string(const Multilog& m) {
  std::ostringstream out;
  out << "{K:";
  write_ids(out, m.actions());
  out << ";NA:";
  write_edges(out, m.not_after());
  out << ";EN:";
  write_edges(out, m.enables());
  out << ";NC:";
  write_edges(out, m.non_commuting());
  out << '}';
  return out.str();
}

std::optional<Multilog> parse_multilog(std::string_view text) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') return std::nullopt;
  auto parts = split(text.substr(1, text.size() - 2), ';');
  if (parts.size() != 4) return std::nullopt;
  const char* tags[] = {"K:", "NA:", "EN:", "NC:"};
  for (int i = 0; i < 4; ++i) {
    if (!parts[i].starts_with(tags[i])) return std::nullopt;
    parts[i].remove_prefix(std::char_traits<char>::length(tags[i]));
  }
  Multilog m;
  for (auto item : split(parts[0], ',')) {
    auto a = parse_action_id(item);
    if (!a) return std::nullopt;
    m.add_action(*a);
  }
  auto na = parse_edges(parts[1]);
  auto en = parse_edges(parts[2]);
  auto nc = parse_edges(parts[3]);
  if (!na || !en || !nc) return std::nullopt;
  for (const auto& e : *na) m.add_not_after(e.from, e.to);
  for (const auto& e : *en) m.add_enables(e.from, e.to);
  for (const auto& e : *nc) m.add_non_commuting(e.from, e.to);
  return m;
}

std::string to_string(const Schedule& s) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out << ',';
    out << to_string(s[i]);
  }
  return out.str();
}

std::optional<Schedule> parse_schedule(std::string_view text) {
  Schedule s;
  for (auto item : split(text, ',')) {
    auto a = parse_action_id(item);
    if (!a) return std::nullopt;
    s.push_back(*a);
  }
  return s;
}

ActionSet guaranteed(const Multilog& m) {
  const Graph g(m);
  return g.to_set(guaranteed_bits(g));
}

ActionSet dead(const Multilog& m) {
  const Graph g(m);
  return g.to_set(dead_bits(g, guaranteed_bits(g)));
}

ActionSet serialised(const Multilog& m) {
  const Graph g(m);
  return g.to_set(serialised_bits(g, m, dead_bits(g, guaranteed_bits(g))));
}

ActionClassification classify(const Multilog& m) {
  const Graph g(m);
  const auto b = classify_bits(g, m);
  return {g.to_set(b.guaranteed), g.to_set(b.dead), g.to_set(b.serialised), g.to_set(b.decided),
          g.to_set(b.stable)};
}

bool is_sound(const Multilog& m) {
  const Graph g(m);
  return !has_order_cycle(g, guaranteed_bits(g));
}

bool is_sound_schedule(const Schedule& s, const Multilog& m) {
  if (s.empty() || s.front() != kInit) return false;
  ActionSet members(s.begin(), s.end());
  if (members.size() != s.size()) return false;
  for (const auto& a : s)
    if (!m.contains(a)) return false;
  auto position = [&](ActionId a) {
    return std::find(s.begin(), s.end(), a) - s.begin();
  };
  for (const auto& e : m.not_after()) {
    if (members.contains(e.from) && members.contains(e.to) && !(position(e.from) < position(e.to)))
      return false;
  }
  for (const auto& e : m.enables()) {
    if (members.contains(e.to) && !members.contains(e.from)) return false;
  }
  return true;
}

PrefixTester::PrefixTester(const Multilog& x) : x_(x) {
  auto inside = [&](const Edge& e) { return x.contains(e.from) && x.contains(e.to); };
  self_ok_ = std::all_of(x.not_after().begin(), x.not_after().end(), inside) &&
             std::all_of(x.enables().begin(), x.enables().end(), inside) &&
             std::all_of(x.non_commuting().begin(), x.non_commuting().end(), inside);
  if (!self_ok_) return;
  const Graph g(x);
  const auto b = classify_bits(g, x);
  self_ok_ = std::all_of(b.stable.begin(), b.stable.end(), [](char c) { return c != 0; });
}

bool PrefixTester::prefixes(const Multilog& m) const {
  if (!self_ok_ || !x_.subset_of(m)) return false;
  const auto& k = x_.actions();
  for (const auto& e : m.not_after())
    if (k.contains(e.to) && !x_.has_not_after(e.from, e.to)) return false;
  for (const auto& e : m.enables())
    if (k.contains(e.to) && !x_.has_enables(e.from, e.to)) return false;
  for (const auto& e : m.non_commuting())
    if ((k.contains(e.from) || k.contains(e.to)) && !x_.has_non_commuting(e.from, e.to))
      return false;
  return true;
}

bool is_wf_prefix(const Multilog& x, const Multilog& m) { return PrefixTester(x).prefixes(m); }

std::optional<Multilog> minimal_prefix_containing(const Multilog& m, ActionId a) {
  if (!m.actions().contains(a)) return std::nullopt;
  const Graph g(m);
  std::vector<char> in(g.size(), 0);
  in[g.index(a)] = 1;
  while (true) {
    // Close under predecessors: not_after and enables sources, and
    // non-commuting partners. kInit is implicit and never added.
    std::vector<int> stack;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in[i]) stack.push_back(static_cast<int>(i));
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto* preds : {&g.na_in[v], &g.en_in[v], &g.nc[v]}) {
        for (int p : *preds) {
          if (p != 0 && !in[p]) {
            in[p] = 1;
            stack.push_back(p);
          }
        }
      }
    }
    const auto keep = g.to_set(in);
    auto x = m.restricted_to(keep);
    if (is_wf_prefix(x, m)) return x;
    // Members that are not yet stable may be guaranteed through actions
    // they enable; pull those in and retry.
    const auto st = classify(x).stable;
    bool grown = false;
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (!in[i] || st.contains(g.id(i))) continue;
      for (int s : g.en_out[i]) {
        if (s != 0 && !in[s]) {
          in[s] = 1;
          grown = true;
        }
      }
    }
    if (!grown) break;
  }
  if (is_wf_prefix(m, m)) return m;
  return std::nullopt;
}

bool is_minimal(const Multilog& m) {
  for (const auto& a : m.actions()) {
    auto least = minimal_prefix_containing(m, a);
    if (least && !(*least == m)) return false;
  }
  return true;
}

Multilog apply_decision(Multilog m, const Decision& d) {
  std::visit(
      [&](const auto& dec) {
        using T = std::decay_t<decltype(dec)>;
        if constexpr (std::is_same_v<T, Guarantee>) {
          m.add_enables(dec.action, kInit);
        } else if constexpr (std::is_same_v<T, Kill>) {
          m.add_not_after(dec.action, dec.action);
        } else {
          m.add_not_after(dec.first, dec.second);
        }
      },
      d);
  return m;
}

}  // namespace semcommit
