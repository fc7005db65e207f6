#include "semcommit/simulator.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <set>

#include "semcommit/protocol.hpp"
#include "semcommit/schedule.hpp"

namespace semcommit {

namespace {

// The sender's own proposal, encoded against the sender's copy of the
// receiver's proposal.
struct Delta {
  Multilog added;
  Multilog removed;
  std::uint64_t base_ts = 0;
  std::uint64_t ts = 0;
};

struct Message {
  std::uint64_t id = 0;
  SiteId from = 0;
  SiteId to = 0;
  std::shared_ptr<const Multilog> m;
  std::shared_ptr<const std::vector<Action>> actions;
  std::vector<Proposal> proposals;
  std::vector<VersionVector> acks;
  std::optional<Delta> delta;
};

enum class Kind { submit, gossip, scripted, deliver, crash, recover };

struct Event {
  std::uint64_t tick;
  std::uint64_t seq;
  Kind kind;
  SiteId site;
  std::size_t ref;  // submission batch, scripted send or message slot

  bool operator>(const Event& o) const { return std::tie(tick, seq) > std::tie(o.tick, o.seq); }
};

class Simulation {
 public:
  explicit Simulation(const Scenario& sc)
      : sc_(sc), rng_(sc.seed), oracle_(std::make_shared<const ConstraintOracle>(sc.oracle)) {
    for (std::size_t i = 0; i < sc.sites; ++i)
      sites_.emplace_back(static_cast<SiteId>(i + 1), sc.weights, oracle_);
    up_.assign(sc.sites, 1);
    decided_all_.assign(sc.sites, 1);

    // Queued first so a crash at tick t precedes everything else at t.
    for (std::size_t k = 0; k < sc.faults.crashes.size(); ++k) {
      const auto& c = sc.faults.crashes[k];
      push(c.at, Kind::crash, c.site, k);
    }
    // Submissions sharing (tick, site) form one batch.
    std::map<std::pair<std::uint64_t, SiteId>, std::size_t> index;
    for (const auto& s : sc.submissions) {
      auto [it, fresh] = index.try_emplace({s.tick, s.site}, batches_.size());
      if (fresh) batches_.emplace_back();
      batches_[it->second].push_back(&s);
    }
    for (std::size_t b = 0; b < batches_.size(); ++b)
      push(batches_[b].front()->tick, Kind::submit, batches_[b].front()->site, b);
    pending_batches_ = batches_.size();

    std::uint64_t start = 0;
    for (std::size_t k = 0; k < sc.gossip.script.size(); ++k) {
      const auto& s = sc.gossip.script[k];
      push(s.tick, Kind::scripted, s.from, k);
      start = std::max(start, s.tick + 1);
    }
    if (sc.sites > 1) {
      for (std::size_t i = 0; i < sc.sites; ++i)
        push(start + i % sc.gossip.period, Kind::gossip, static_cast<SiteId>(i + 1), 0);
    }
  }

  RunResult run() {
    RunResult r;
    if (quiescent()) {
      r.quiescent = true;
    } else {
      while (!queue_.empty() && processed_ < sc_.horizon) {
        const auto ev = queue_.top();
        queue_.pop();
        ++processed_;
        now_ = ev.tick;
        handle(ev);
        if (quiescent()) {
          r.quiescent = true;
          break;
        }
      }
    }
    r.processed = processed_;
    r.last_tick = now_;
    for (const auto& s : sites_) r.finals.push_back(s.m);
    r.trace = std::move(trace_);
    return r;
  }

 private:
  void push(std::uint64_t tick, Kind kind, SiteId site, std::size_t ref) {
    queue_.push(Event{tick, next_seq_++, kind, site, ref});
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  void record(SiteId site, EventKind kind, EventPayload payload = {}) {
    trace_.push_back(TraceEvent{trace_.size(), now_, site, kind, std::move(payload)});
  }

  SiteState& site(SiteId s) { return sites_[s - 1]; }

  void handle(const Event& ev) {
    switch (ev.kind) {
      case Kind::submit:
        submit(ev);
        break;
      case Kind::gossip:
        if (up_[ev.site - 1]) send(ev.site, pick_peer(ev.site));
        push(now_ + sc_.gossip.period, Kind::gossip, ev.site, 0);
        break;
      case Kind::scripted:
        if (up_[ev.site - 1]) send(ev.site, sc_.gossip.script[ev.ref].to);
        break;
      case Kind::deliver:
        deliver(ev);
        break;
      case Kind::crash: {
        const auto& c = sc_.faults.crashes[ev.ref];
        if (!up_[c.site - 1]) break;
        up_[c.site - 1] = 0;
        record(c.site, EventKind::crash);
        if (c.duration) push(now_ + std::max<std::uint64_t>(*c.duration, 1), Kind::recover, c.site, 0);
        break;
      }
      case Kind::recover:
        if (up_[ev.site - 1]) break;
        up_[ev.site - 1] = 1;
        record(ev.site, EventKind::recover);
        for (auto b : deferred_[ev.site]) push(now_, Kind::submit, ev.site, b);
        deferred_[ev.site].clear();
        break;
    }
  }

  SiteId pick_peer(SiteId self) {
    const auto n = static_cast<SiteId>(sc_.sites);
    auto j = static_cast<SiteId>(rng_() % (n - 1)) + 1;
    if (j >= self) ++j;
    return j;
  }

  void submit(const Event& ev) {
    if (!up_[ev.site - 1]) {
      deferred_[ev.site].push_back(ev.ref);
      return;
    }
    auto& st = site(ev.site);
    std::vector<Action> batch;
    for (const auto* s : batches_[ev.ref]) {
      batch.push_back(new_action(st, s->label, s->db));
    }
    // Later actions of a batch know the earlier ones.
    for (std::size_t i = 1; i < batch.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) batch[i].submit_vv.observe(batch[j].id);
    }
    SubmitInfo info;
    for (const auto& a : batch) {
      info.actions.push_back(a.id);
      submitted_.insert(a.id);
    }
    const bool changed = client_actions_constraints(st, batch);
    --pending_batches_;
    record(ev.site, EventKind::submit, std::move(info));
    std::fill(decided_all_.begin(), decided_all_.end(), 0);
    react(st, changed, true);
  }

  void send(SiteId from, SiteId to) {
    auto& st = site(from);
    Message msg;
    msg.id = next_message_++;
    msg.from = from;
    msg.to = to;
    msg.m = std::make_shared<const Multilog>(st.m);
    auto actions = std::make_shared<std::vector<Action>>();
    for (const auto& [id, a] : st.known) actions->push_back(a);
    msg.actions = std::move(actions);
    msg.proposals = st.proposals;
    msg.acks = st.acks;
    if (sc_.gossip.delta) {
      const auto& base = st.proposals[to - 1];
      const auto& mine = st.own();
      msg.delta = Delta{mine.m.minus(base.m), base.m.minus(mine.m), base.ts, mine.ts};
      msg.proposals[from - 1] = Proposal{{}, 0, from};
    }
    record(from, EventKind::send, MessageInfo{msg.id, from, to, {}});

    const auto slot = messages_.size();
    const bool lost = std::find(sc_.faults.drop_messages.begin(), sc_.faults.drop_messages.end(),
                                msg.id) != sc_.faults.drop_messages.end() ||
                      (sc_.faults.drop > 0 && uniform() < sc_.faults.drop);
    messages_.push_back(std::make_shared<const Message>(std::move(msg)));
    if (lost) {
      dropped_.insert(slot);
      push(now_ + sc_.gossip.latency, Kind::deliver, to, slot);
      return;
    }
    push(now_ + delay(), Kind::deliver, to, slot);
    if (sc_.faults.duplicate > 0 && uniform() < sc_.faults.duplicate)
      push(now_ + delay(), Kind::deliver, to, slot);
  }

  std::uint64_t delay() {
    auto d = sc_.gossip.latency;
    if (sc_.gossip.jitter > 0) d += rng_() % (sc_.gossip.jitter + 1);
    if (sc_.faults.reorder > 0 && uniform() < sc_.faults.reorder)
      d += 1 + rng_() % (2 * sc_.gossip.period);
    return d;
  }

  void deliver(const Event& ev) {
    const auto& msg = *messages_[ev.ref];
    if (dropped_.contains(ev.ref)) {
      record(msg.to, EventKind::drop, MessageInfo{msg.id, msg.from, msg.to, "loss"});
      return;
    }
    if (!up_[msg.to - 1]) {
      record(msg.to, EventKind::drop, MessageInfo{msg.id, msg.from, msg.to, "crashed"});
      return;
    }
    record(msg.to, EventKind::deliver, MessageInfo{msg.id, msg.from, msg.to, {}});
    auto& st = site(msg.to);
    bool changed = receive_and_compare(st, *msg.m, *msg.actions);
    bool state = merge_acks(st, msg.acks);
    auto proposals = msg.proposals;
    if (msg.delta) {
      const auto& d = *msg.delta;
      auto& slot = proposals[msg.from - 1];
      if (d.base_ts == 0) {
        slot = Proposal{d.added, d.ts, msg.from};
      } else if (auto it = st.history.find(d.base_ts); it != st.history.end()) {
        Multilog rebuilt = it->second.minus(d.removed);
        rebuilt.merge(d.added);
        slot = Proposal{std::move(rebuilt), d.ts, msg.from};
      }
    }
    state |= merge_proposals(st, proposals);
    react(st, changed, state);
  }

  // Proposer and acceptor steps after a state change, then the tentative
  // schedule when the site multilog moved.
  void react(SiteState& st, bool multilog_changed, bool state_changed) {
    const auto& kind = sc_.proposer_for(st.id);
    if (multilog_changed) propose(st, kind);
    if (multilog_changed || state_changed) {
      while (true) {
        bool any = false;
        while (auto rec = elect(st)) {
          any = true;
          ElectInfo info;
          info.source = rec->winner.source;
          info.ts = rec->winner.ts;
          info.tally = rec->tally;
          info.cotally = rec->cotally;
          info.against = rec->against;
          for (const auto& o : rec->opponents)
            info.opponents.push_back({o.candidate.source, o.tally});
          info.evaluated = rec->evaluated;
          info.candidate = std::make_shared<const Multilog>(rec->winner.x);
          record(st.id, EventKind::elect, std::move(info));
        }
        if (!any) break;
        multilog_changed = true;
        propose(st, kind);
      }
    }
    if (multilog_changed) {
      auto snapshot = std::make_shared<const Multilog>(st.m);
      const auto cls = classify(st.m);
      const auto& k = st.m.actions();
      decided_all_[st.id - 1] =
          std::all_of(k.begin(), k.end(), [&](ActionId a) { return cls.decided.contains(a); });
      record(st.id, EventKind::schedule,
             ScheduleInfo{choose_site_schedule(st.m, sc_.schedule_policy, st.arrival_order),
                          std::move(snapshot)});
    }
  }

  void propose(SiteState& st, const ProposerKind& kind) {
    make_proposal(st, kind);
    record(st.id, EventKind::propose,
           ProposeInfo{st.own().ts, std::make_shared<const Multilog>(st.own().m)});
  }

  bool quiescent() const {
    if (pending_batches_ != 0) return false;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      if (!up_[i] || !decided_all_[i]) return false;
      if (sites_[i].m.actions().size() != submitted_.size()) return false;
      if (i > 0 && !(sites_[i].m == sites_[0].m)) return false;
    }
    return true;
  }

  const Scenario& sc_;
  std::mt19937_64 rng_;
  std::shared_ptr<const ConstraintOracle> oracle_;
  std::vector<SiteState> sites_;
  std::vector<char> up_;
  std::vector<char> decided_all_;
  std::vector<std::vector<const Submission*>> batches_;
  std::size_t pending_batches_ = 0;
  std::map<SiteId, std::vector<std::size_t>> deferred_;
  std::set<ActionId> submitted_;
  std::vector<std::shared_ptr<const Message>> messages_;
  std::set<std::size_t> dropped_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_message_ = 1;
  std::uint64_t processed_ = 0;
  std::uint64_t now_ = 0;
  Trace trace_;
};

}  // namespace

RunResult run(const Scenario& sc) {
  if (auto causes = validate(sc); !causes.empty()) throw InvalidScenario(std::move(causes));
  return Simulation(sc).run();
}

}  // namespace semcommit
