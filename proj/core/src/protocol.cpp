#include "semcommit/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

#include "semcommit/schedule.hpp"

namespace semcommit {

namespace {

void append_constraints(SiteState& st, const Action& a, bool with_enables) {
  for (const auto& [id, b] : st.known) {
    if (id == a.id) continue;
    add_edges(st.m, st.oracle->constraints(a, b), with_enables);
  }
}

void refresh_own_ack(SiteState& st) { st.acks[st.id - 1].merge(st.knowledge()); }

bool covers_all(const ActionSet& outer, const ActionSet& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace

std::string to_string(const Weight& w) {
  return std::to_string(w.numerator()) + "/" + std::to_string(w.denominator());
}

std::optional<Weight> parse_weight(std::string_view text) {
  const auto slash = text.find('/');
  std::int64_t num = 0;
  std::int64_t den = 1;
  auto parse = [](std::string_view s, std::int64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc{} && p == s.data() + s.size();
  };
  if (slash == std::string_view::npos) {
    if (!parse(text, num)) return std::nullopt;
  } else if (!parse(text.substr(0, slash), num) || !parse(text.substr(slash + 1), den)) {
    return std::nullopt;
  }
  if (den <= 0 || num < 0) return std::nullopt;
  return Weight(num, den);
}

std::string to_string(const Vote& v) { return to_string(v.weight) + "@" + std::to_string(v.site); }

std::optional<Vote> parse_vote(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) return std::nullopt;
  auto w = parse_weight(text.substr(0, at));
  SiteId site = 0;
  auto s = text.substr(at + 1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), site);
  if (!w || s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return Vote{*w, site};
}

SiteState::SiteState(SiteId id_, std::vector<Weight> weights_,
                     std::shared_ptr<const ConstraintOracle> oracle_)
    : id(id_), weights(std::move(weights_)), oracle(std::move(oracle_)) {
  proposals.resize(weights.size());
  for (std::size_t k = 0; k < proposals.size(); ++k)
    proposals[k].proposer = static_cast<SiteId>(k + 1);
  acks.resize(weights.size());
  candidate_cache.resize(weights.size());
}

VersionVector SiteState::knowledge() const {
  VersionVector vv;
  SiteId site = 0;
  std::uint32_t run = 0;
  for (const auto& [id, a] : known) {
    if (id.site != site) {
      site = id.site;
      run = 0;
    }
    if (id.seq == run + 1) {
      run = id.seq;
      vv.set(site, run);
    }
  }
  return vv;
}

Action new_action(SiteState& st, std::string label, std::optional<DbPayload> db) {
  Action a;
  a.id = ActionId{st.id, ++st.next_seq};
  a.label = std::move(label);
  a.db = std::move(db);
  a.submit_vv = st.knowledge();
  a.submit_vv.observe(a.id);
  return a;
}

bool client_actions_constraints(SiteState& st, const std::vector<Action>& batch) {
  for (const auto& a : batch) {
    if (st.known.contains(a.id) || a.id == kInit)
      throw DuplicateAction("action " + to_string(a.id) + " already known at site " +
                            std::to_string(st.id));
  }
  const auto actions_before = st.m.actions().size();
  const auto edges_before = st.m.edge_count();
  for (const auto& a : batch) {
    st.known.emplace(a.id, a);
    st.m.add_action(a.id);
    st.arrival_order.push_back(a.id);
    if (a.id.site == st.id) st.next_seq = std::max(st.next_seq, a.id.seq);
  }
  for (const auto& a : batch) append_constraints(st, a, true);
  refresh_own_ack(st);
  return st.m.actions().size() != actions_before || st.m.edge_count() != edges_before;
}

bool receive_and_compare(SiteState& st, const Multilog& in, const std::vector<Action>& actions) {
  bool changed = st.m.merge(in);
  std::vector<const Action*> fresh;
  for (const auto& a : actions) {
    auto [it, inserted] = st.known.emplace(a.id, a);
    if (!inserted) continue;
    fresh.push_back(&it->second);
    st.arrival_order.push_back(a.id);
    if (!st.m.actions().contains(a.id)) {
      st.m.add_action(a.id);
      changed = true;
    }
  }
  for (const auto* a : fresh) {
    const auto edges_before = st.m.edge_count();
    append_constraints(st, *a, false);
    changed |= st.m.edge_count() != edges_before;
  }
  if (!fresh.empty()) refresh_own_ack(st);
  return changed;
}

bool merge_acks(SiteState& st, const std::vector<VersionVector>& acks) {
  bool changed = false;
  for (std::size_t k = 0; k < acks.size() && k < st.acks.size(); ++k) {
    const auto before = st.acks[k];
    st.acks[k].merge(acks[k]);
    changed |= !(before == st.acks[k]);
  }
  return changed;
}

bool merge_proposals(SiteState& st, const std::vector<Proposal>& incoming) {
  bool changed = false;
  for (std::size_t k = 0; k < incoming.size() && k < st.proposals.size(); ++k) {
    if (st.proposals[k].ts < incoming[k].ts) {
      st.proposals[k] = incoming[k];
      changed = true;
    }
  }
  return changed;
}

void update_proposal(SiteState& st) {
  auto& p = st.own().m;
  const auto decided = classify(st.m).decided;
  ActionSet keep;
  for (const auto& a : p.actions())
    if (!decided.contains(a)) keep.insert(keep.end(), a);
  p = p.restricted_to(keep);
  p.mutable_non_commuting().clear();
}

void make_proposal(SiteState& st, const ProposerKind& kind) {
  if (!is_sound(st.m)) throw UnsoundMultilog("site " + std::to_string(st.id) + " is unsound");
  update_proposal(st);
  Multilog input = union_of(st.m, st.own().m);
  if (!is_sound(input)) input = st.m;
  auto out = prune_redundant_decisions(st.m, propose(input, kind, st.id));
  auto& own = st.own();
  own.m = std::move(out);
  ++own.ts;
  own.proposer = st.id;
  st.history[own.ts] = own.m;
  while (st.history.size() > 16) st.history.erase(st.history.begin());
}

bool eligible(const Multilog& x, const SiteState& st) {
  const auto& k = x.actions();
  for (const auto& a : k) {
    for (const auto& vv : st.acks)
      if (!vv.covers(a)) return false;
  }
  auto inside = [&](ActionId a) { return a == kInit || k.contains(a); };
  for (const auto& e : st.m.not_after())
    if (k.contains(e.to) && !inside(e.from)) return false;
  for (const auto& e : st.m.enables())
    if (k.contains(e.to) && !inside(e.from)) return false;
  for (const auto& e : st.m.non_commuting())
    if (inside(e.from) != inside(e.to)) return false;
  if (st.oracle->kind() == ConstraintOracle::Kind::calendar) {
    for (const auto& a : k) {
      auto it = st.known.find(a);
      if (it == st.known.end()) return false;
      for (const auto& label : st.oracle->predecessor_labels(it->second.label)) {
        bool seen = false;
        for (const auto& [id, b] : st.known) {
          if (b.label != label) continue;
          seen = true;
          if (!k.contains(id)) return false;
        }
        if (!seen) return false;
      }
    }
  }
  return true;
}

Vote tally(const Multilog& x, const SiteState& st) {
  const PrefixTester t(x);
  Vote v;
  if (!t.self_consistent()) return v;
  for (std::size_t k = 0; k < st.sites(); ++k)
    if (t.prefixes(st.proposals[k].m)) v = v + Vote{st.weights[k], static_cast<SiteId>(k + 1)};
  return v;
}

namespace {

// The comparable well-formed prefix of proposal p that competes with x, if
// p holds one.
std::optional<Multilog> comparable_opponent(const Multilog& x, const Multilog& p) {
  if (!covers_all(p.actions(), x.actions())) return std::nullopt;
  auto b = p.restricted_to(x.actions());
  if (b == x || !is_wf_prefix(b, p) || is_wf_prefix(x, b)) return std::nullopt;
  return b;
}

}  // namespace

Vote cotally(const Multilog& x, const SiteState& st) {
  const PrefixTester t(x);
  Vote v;
  for (std::size_t k = 0; k < st.sites(); ++k) {
    const auto& p = st.proposals[k].m;
    if (t.self_consistent() && t.prefixes(p)) continue;
    if (comparable_opponent(x, p)) continue;
    v = v + Vote{st.weights[k], static_cast<SiteId>(k + 1)};
  }
  return v;
}

std::vector<OpponentTally> opponents(const Multilog& x, const SiteState& st) {
  std::vector<OpponentTally> out;
  for (std::size_t k = 0; k < st.sites(); ++k) {
    const auto& p = st.proposals[k];
    auto b = comparable_opponent(x, p.m);
    if (!b) continue;
    if (std::any_of(out.begin(), out.end(),
                    [&](const OpponentTally& o) { return o.candidate.x == *b; }))
      continue;
    out.push_back({Candidate{std::move(*b), p.proposer, p.ts}, Vote{}});
  }
  for (auto& o : out) o.tally = tally(o.candidate.x, st);
  return out;
}

bool canonical_less(const Multilog& a, const Multilog& b) {
  if (a.actions().size() != b.actions().size()) return a.actions().size() < b.actions().size();
  if (a.edge_count() != b.edge_count()) return a.edge_count() < b.edge_count();
  return std::tie(a.actions(), a.not_after(), a.enables(), a.non_commuting()) <
         std::tie(b.actions(), b.not_after(), b.enables(), b.non_commuting());
}

std::vector<Candidate> extract_candidates(SiteState& st) {
  std::vector<Candidate> out;
  for (std::size_t k = 0; k < st.sites(); ++k) {
    const auto& p = st.proposals[k];
    auto& cache = st.candidate_cache[k];
    if (!cache.valid || cache.ts != p.ts) {
      cache.candidates.clear();
      auto add = [&](Multilog x) {
        if (std::find(cache.candidates.begin(), cache.candidates.end(), x) ==
            cache.candidates.end())
          cache.candidates.push_back(std::move(x));
      };
      for (const auto& a : p.m.actions())
        if (auto x = minimal_prefix_containing(p.m, a)) add(std::move(*x));
      if (!p.m.actions().empty() && is_wf_prefix(p.m, p.m)) add(p.m);
      cache.ts = p.ts;
      cache.valid = true;
    }
    for (const auto& x : cache.candidates) {
      if (std::any_of(out.begin(), out.end(), [&](const Candidate& c) { return c.x == x; }))
        continue;
      out.push_back(Candidate{x, p.proposer, p.ts});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return canonical_less(a.x, b.x); });
  return out;
}

std::optional<ElectionRecord> elect(SiteState& st) {
  const auto candidates = extract_candidates(st);
  if (candidates.empty()) return std::nullopt;
  const auto decided = classify(st.m).decided;
  std::vector<std::pair<Vote, const Multilog*>> rivals;
  rivals.reserve(candidates.size());
  for (const auto& c : candidates) rivals.emplace_back(tally(c.x, st), &c.x);
  std::stable_sort(rivals.begin(), rivals.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const auto incompatible = [](const Multilog& a, const Multilog& b) {
    return !is_sound(union_of(a, b));
  };
  for (const auto& c : candidates) {
    if (c.x.subset_of(st.m)) continue;
    if (std::all_of(c.x.actions().begin(), c.x.actions().end(),
                    [&](ActionId a) { return decided.contains(a); }))
      continue;
    if (!eligible(c.x, st)) continue;
    ++st.candidates_evaluated;
    const auto t = tally(c.x, st);
    const auto co = cotally(c.x, st);
    auto opp = opponents(c.x, st);
    Vote against;
    for (const auto& o : opp)
      if (o.tally > against && incompatible(o.candidate.x, c.x)) against = o.tally;
    for (const auto& [v, y] : rivals) {
      if (!(v > against)) break;
      if (incompatible(*y, c.x)) against = v;
    }
    if (!(t > against + co)) continue;
    st.m.merge(c.x);
    return ElectionRecord{c, t, co, against, std::move(opp), st.candidates_evaluated};
  }
  return std::nullopt;
}

}  // namespace semcommit
