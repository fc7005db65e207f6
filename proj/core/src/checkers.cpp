#include "semcommit/checkers.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "semcommit/schedule.hpp"

namespace semcommit {

namespace {

Verdict fail(std::string detail) { return {Verdict::Status::fail, std::move(detail)}; }

std::string where(const TraceEvent& e) {
  return "event " + std::to_string(e.index) + " (tick " + std::to_string(e.tick) + ", site " +
         std::to_string(e.site) + ")";
}

bool brute_force_sound(const Multilog& m) {
  bool found = false;
  for_each_sound_schedule(m, 8, [&](const Schedule&) { found = true; });
  return found;
}

// Last snapshot per site, indexed by site - 1.
std::vector<const Multilog*> last_snapshots(const Trace& t, std::size_t sites) {
  std::vector<const Multilog*> out(sites, nullptr);
  for (const auto& e : t) {
    if (e.kind != EventKind::schedule || e.site < 1 || e.site > sites) continue;
    out[e.site - 1] = std::get<ScheduleInfo>(e.payload).multilog.get();
  }
  return out;
}

}  // namespace

std::string to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::pass:
      return "pass";
    case Verdict::Status::fail:
      return "fail";
    case Verdict::Status::not_applicable:
      return "not applicable";
  }
  return "?";
}

Verdict check_local_soundness(const Trace& t) {
  for (const auto& e : t) {
    if (e.kind != EventKind::schedule) continue;
    const auto& info = std::get<ScheduleInfo>(e.payload);
    if (!info.multilog) return fail(where(e) + ": schedule without a multilog");
    if (!is_sound(*info.multilog))
      return fail(where(e) + ": site multilog " + to_string(*info.multilog) + " is unsound");
    if (!is_sound_schedule(info.schedule, *info.multilog))
      return fail(where(e) + ": schedule " + to_string(info.schedule) + " is unsound for " +
                  to_string(*info.multilog));
  }
  return {};
}

Verdict check_mergeability(const Trace& t) {
  Multilog all;
  for (const auto& e : t) {
    if (e.kind == EventKind::schedule) all.merge(*std::get<ScheduleInfo>(e.payload).multilog);
  }
  bool sound = is_sound(all);
  if (sound && all.universe().size() - 1 <= 8) sound = brute_force_sound(all);
  if (sound) return {};
  // First snapshot that breaks the running union.
  Multilog running;
  for (const auto& e : t) {
    if (e.kind != EventKind::schedule) continue;
    running.merge(*std::get<ScheduleInfo>(e.payload).multilog);
    if (!is_sound(running))
      return fail(where(e) + ": union of site multilogs " + to_string(running) + " is unsound");
  }
  return fail("union of site multilogs " + to_string(all) + " has no sound schedule");
}

Verdict check_liveness(const Trace& t, const Scenario& sc) {
  if (!is_fair(sc)) return {Verdict::Status::not_applicable, "scenario is not fair"};
  std::set<ActionId> submitted;
  for (const auto& e : t) {
    if (e.kind != EventKind::submit) continue;
    const auto& ids = std::get<SubmitInfo>(e.payload).actions;
    submitted.insert(ids.begin(), ids.end());
  }
  if (submitted.size() != sc.submissions.size())
    return fail(std::to_string(sc.submissions.size() - submitted.size()) +
                " declared submissions never happened");
  const auto finals = last_snapshots(t, sc.sites);
  for (std::size_t i = 0; i < finals.size(); ++i) {
    if (submitted.empty()) break;
    if (!finals[i]) return fail("site " + std::to_string(i + 1) + " never learned any action");
    const auto decided = classify(*finals[i]).decided;
    for (const auto& a : submitted) {
      if (!finals[i]->actions().contains(a))
        return fail("action " + to_string(a) + " never reached site " + std::to_string(i + 1));
      if (!decided.contains(a))
        return fail("action " + to_string(a) + " is undecided at site " + std::to_string(i + 1));
    }
  }
  for (const auto& e : t) {
    if (e.kind != EventKind::schedule) continue;
    const auto& snap = *std::get<ScheduleInfo>(e.payload).multilog;
    for (std::size_t i = 0; i < finals.size(); ++i) {
      if (finals[i] && !snap.subset_of(*finals[i]))
        return fail(where(e) + ": snapshot never reached site " + std::to_string(i + 1));
    }
  }
  return {};
}

Metrics metrics(const Trace& t, std::size_t sites) {
  Metrics m;
  m.sites = sites;
  std::map<ActionId, std::uint64_t> submitted_at;
  std::uint64_t batches = 0;
  // decided_at[action][site] = first event index where decided there.
  std::map<ActionId, std::map<SiteId, std::uint64_t>> decided_at;
  std::size_t pending = 0;
  for (const auto& e : t) {
    switch (e.kind) {
      case EventKind::send:
        ++m.messages;
        if (pending > 0) ++m.active_messages;
        break;
      case EventKind::deliver:
        ++m.delivered;
        break;
      case EventKind::drop:
        ++m.dropped;
        break;
      case EventKind::submit: {
        const auto& ids = std::get<SubmitInfo>(e.payload).actions;
        ++batches;
        for (const auto& a : ids)
          if (submitted_at.emplace(a, e.index).second && decided_at[a].size() < sites) ++pending;
        break;
      }
      case EventKind::elect:
        ++m.elections;
        break;
      case EventKind::schedule: {
        const auto& snap = *std::get<ScheduleInfo>(e.payload).multilog;
        const auto decided = classify(snap).decided;
        for (const auto& a : snap.actions()) {
          if (!decided.contains(a)) continue;
          auto& at = decided_at[a];
          if (at.emplace(e.site, e.index).second && at.size() == sites &&
              submitted_at.contains(a))
            --pending;
        }
        break;
      }
      default:
        break;
    }
  }
  // Candidates evaluated: cumulative per site, so take the last per site.
  std::map<SiteId, std::size_t> evaluated;
  for (const auto& e : t)
    if (e.kind == EventKind::elect) evaluated[e.site] = std::get<ElectInfo>(e.payload).evaluated;
  for (const auto& [site, n] : evaluated) m.candidates_evaluated += n;

  m.submitted = submitted_at.size();
  m.batch_degree = batches ? static_cast<double>(m.submitted) / static_cast<double>(batches) : 0.0;
  std::vector<ActionClassification> final_classes;
  for (const auto* f : last_snapshots(t, sites))
    if (f) final_classes.push_back(classify(*f));
  double latency_sum = 0;
  for (const auto& [a, at] : submitted_at) {
    auto it = decided_at.find(a);
    if (it == decided_at.end() || it->second.size() != sites) continue;
    ++m.decided;
    std::uint64_t last = 0;
    for (const auto& [site, idx] : it->second) last = std::max(last, idx);
    latency_sum += static_cast<double>(last - at);
    bool all_guaranteed = true;
    bool all_dead = true;
    for (const auto& cls : final_classes) {
      all_guaranteed &= cls.guaranteed.contains(a);
      all_dead &= cls.dead.contains(a);
    }
    if (all_guaranteed) ++m.committed;
    if (all_dead) ++m.aborted;
  }
  if (m.decided) {
    m.mean_decision_latency = latency_sum / static_cast<double>(m.decided);
    m.messages_per_decided = static_cast<double>(m.messages) / static_cast<double>(m.decided);
  }
  if (m.committed) {
    m.active_messages_per_committed =
        static_cast<double>(m.active_messages) / static_cast<double>(m.committed);
  }
  return m;
}

std::string render_metrics(const Metrics& m) {
  std::ostringstream out;
  out << "sites                      " << m.sites << '\n'
      << "messages sent              " << m.messages << '\n'
      << "messages delivered         " << m.delivered << '\n'
      << "messages dropped           " << m.dropped << '\n'
      << "messages while undecided   " << m.active_messages << '\n'
      << "actions submitted          " << m.submitted << '\n'
      << "actions decided everywhere " << m.decided << '\n'
      << "  committed                " << m.committed << '\n'
      << "  aborted                  " << m.aborted << '\n'
      << "elections                  " << m.elections << '\n'
      << "candidates evaluated       " << m.candidates_evaluated << '\n'
      << "mean decision latency      " << m.mean_decision_latency << " events\n"
      << "messages per decided action " << m.messages_per_decided << '\n'
      << "undecided-time messages per committed action " << m.active_messages_per_committed
      << '\n'
      << "mean batch size d          " << m.batch_degree << '\n';
  if (m.batch_degree > 0) {
    out << "heuristic n/2 * 1/d        " << static_cast<double>(m.sites) / 2.0 / m.batch_degree
        << " (informational; counts one election round per batch)\n";
  }
  return out.str();
}

std::string render_explain(const Trace& t) {
  std::ostringstream out;
  std::size_t n = 0;
  for (const auto& e : t) {
    if (e.kind != EventKind::elect) continue;
    const auto& info = std::get<ElectInfo>(e.payload);
    ++n;
    out << "election " << n << " at site " << e.site << ", tick " << e.tick << " (event "
        << e.index << ")\n";
    out << "  candidate X from site " << info.source << " proposal ts " << info.ts << '\n';
    out << "    K = " << to_string(info.candidate->actions()) << '\n';
    out << "    X = " << to_string(*info.candidate) << '\n';
    out << "  tally(X)   = " << to_string(info.tally) << '\n';
    if (info.opponents.empty()) {
      out << "  opponents  = none\n";
    } else {
      for (const auto& o : info.opponents)
        out << "  opponent from site " << o.source << ": tally " << to_string(o.tally) << '\n';
    }
    out << "  strongest incompatible rival " << to_string(info.against) << '\n';
    out << "  cotally(X) = " << to_string(info.cotally) << '\n';
    out << "  " << to_string(info.tally) << " > " << to_string(info.against) << " + "
        << to_string(info.cotally) << ", so X is elected and merged\n";
  }
  if (n == 0) out << "no elections in trace\n";
  return out.str();
}

}  // namespace semcommit
