// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "semcommit/checkers.hpp"
#include "semcommit/proposer.hpp"
#include "semcommit/scenario.hpp"
#include "semcommit/semantics.hpp"
#include "semcommit/simulator.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace semcommit;
using namespace semcommit::testing;

namespace {

const std::string kDir = SEMCOMMIT_SCENARIO_DIR;

// Wall-clock budgets in seconds.
constexpr double kWorkedExampleBudget = 1.0;
constexpr double kEquivalenceBudget = 60.0;
constexpr double kSafetyBudget = 300.0;

struct Outcome {
  bool pass = true;
  std::string detail;
  double budget = 0;  // 0: unbudgeted

  void require(bool ok, const std::string& what) {
    if (ok || !pass) {
      pass &= ok;
      return;
    }
    pass = false;
    detail = what;
  }
};

std::size_t dead_count(const Multilog& m) {
  std::size_t n = 0;
  for (const auto& a : dead(m)) n += m.actions().contains(a);
  return n;
}

Outcome worked_example() {
  Outcome o;
  o.budget = kWorkedExampleBudget;
  const ActionId alpha{1, 1}, beta{1, 2}, gamma_{2, 1};
  const auto sc = load_scenario(kDir + "/alice-bob-3site.scn");
  const auto r = run(sc);
  o.require(r.quiescent, "run did not quiesce");
  const TraceEvent* decisive = nullptr;
  for (const auto& e : r.trace) {
    if (e.kind != EventKind::elect) continue;
    if (std::get<ElectInfo>(e.payload).candidate->has_enables(beta, kInit)) decisive = &e;
  }
  o.require(decisive != nullptr, "no election committed en(beta, INIT)");
  if (decisive) {
    const auto& info = std::get<ElectInfo>(decisive->payload);
    o.require(to_string(info.tally) == "2/3@3", "tally " + to_string(info.tally));
    o.require(info.opponents.size() == 1, "opponent count " + std::to_string(info.opponents.size()));
    if (info.opponents.size() == 1)
      o.require(info.opponents[0].tally.weight == Weight(1, 3),
                "opponent tally " + to_string(info.opponents[0].tally));
    o.require(info.cotally.weight == Weight(0), "cotally " + to_string(info.cotally));
  }
  for (std::size_t i = 0; i < r.finals.size(); ++i) {
    const auto& m = r.finals[i];
    o.require(m.has_enables(beta, kInit), "site " + std::to_string(i + 1) + " lacks en(beta, INIT)");
    const auto g = guaranteed(m);
    o.require(g.contains(alpha) && g.contains(beta),
              "alpha/beta not guaranteed at site " + std::to_string(i + 1));
    o.require(dead(m).contains(gamma_), "gamma not dead at site " + std::to_string(i + 1));
  }
  std::set<SiteId> seen;
  for (const auto& e : r.trace) {
    if (e.kind != EventKind::schedule) continue;
    const auto& info = std::get<ScheduleInfo>(e.payload);
    if (!info.multilog->has_enables(beta, kInit)) continue;
    seen.insert(e.site);
    const auto& s = info.schedule;
    o.require(s.size() >= 3 && s[0] == kInit && s[1] == alpha && s[2] == beta,
              "site " + std::to_string(e.site) + " schedule " + to_string(s));
  }
  o.require(seen.size() == sc.sites, "not every site scheduled after the decision");
  if (o.pass) o.detail = "tally 2/3@3, sole opponent 1/3, cotally 0; schedules start INIT;alpha;beta";
  return o;
}

// Returns an empty string when the classification matches the oracle.
std::string compare_with_brute_force(const Multilog& m) {
  const auto bf = schedule_sets(m);
  if (is_sound(m) != bf.sound()) return "soundness disagrees on " + to_string(m);
  if (!bf.sound()) return {};
  if (guaranteed(m) != bf.in_every) return "guaranteed disagrees on " + to_string(m);
  const auto d = dead(m);
  for (const auto& a : m.actions())
    if (d.contains(a) == bf.in_some.contains(a)) return "dead disagrees on " + to_string(m);
  return {};
}

Outcome equivalence() {
  Outcome o;
  o.budget = kEquivalenceBudget;
  std::size_t exhaustive = 0;
  for (std::size_t n = 0; n <= 4; ++n) {
    for_each_small_multilog(n, 4, [&](const Multilog& m) {
      ++exhaustive;
      if (!o.pass) return;
      const auto err = compare_with_brute_force(m);
      o.require(err.empty(), err);
    });
  }
  Rng rng(2024);
  const MultilogShape shape;  // up to 8 actions
  constexpr int kRandom = 10000;
  for (int i = 0; i < kRandom && o.pass; ++i) {
    const auto err = compare_with_brute_force(random_multilog(rng, shape));
    o.require(err.empty(), err);
  }
  if (o.pass)
    o.detail = std::to_string(exhaustive) + " exhaustive + " + std::to_string(kRandom) +
               " random multilogs agree";
  return o;
}

Outcome safety() {
  Outcome o;
  o.budget = kSafetyBudget;
  Rng rng(1);
  constexpr int kRuns = 500;
  std::set<ConstraintOracle::Kind> oracles;
  std::set<std::size_t> sizes;
  int crashes = 0, recoveries = 0, drops = 0, dups = 0, reorders = 0;
  for (int i = 0; i < kRuns && o.pass; ++i) {
    const auto sc = random_scenario(rng, ScenarioShape{});
    oracles.insert(sc.oracle.kind());
    sizes.insert(sc.sites);
    crashes += !sc.faults.crashes.empty();
    for (const auto& c : sc.faults.crashes) recoveries += c.duration.has_value();
    drops += sc.faults.drop > 0;
    dups += sc.faults.duplicate > 0;
    reorders += sc.faults.reorder > 0;
    const auto r = run(sc);
    const auto a = check_local_soundness(r.trace);
    const auto b = check_mergeability(r.trace);
    o.require(a.passed(), "run " + std::to_string(i) + ": " + a.detail);
    o.require(b.passed(), "run " + std::to_string(i) + ": " + b.detail);
  }
  o.require(oracles.contains(ConstraintOracle::Kind::calendar) &&
                oracles.contains(ConstraintOracle::Kind::serializable_db),
            "oracle coverage");
  o.require(sizes == std::set<std::size_t>{2, 3, 4, 5}, "site-count coverage");
  o.require(crashes && recoveries && drops && dups && reorders, "fault coverage");
  if (o.pass) {
    std::ostringstream d;
    d << kRuns << " runs; crashes in " << crashes << ", recoveries " << recoveries << ", drop "
      << drops << ", dup " << dups << ", reorder " << reorders;
    o.detail = d.str();
  }
  return o;
}

Outcome liveness() {
  Outcome o;
  Rng rng(2);
  constexpr int kRuns = 200;
  ScenarioShape shape;
  shape.fair = true;
  for (int i = 0; i < kRuns && o.pass; ++i) {
    const auto sc = random_scenario(rng, shape);
    const auto v = check_liveness(run(sc).trace, sc);
    o.require(v.status == Verdict::Status::pass, "run " + std::to_string(i) + ": " +
                                                     to_string(v.status) + " " + v.detail);
  }
  if (o.pass) o.detail = std::to_string(kRuns) + " fair runs decide every action everywhere";
  return o;
}

Outcome proposer_contract() {
  Outcome o;
  Rng rng(5);
  constexpr int kInputs = 1000;
  for (int i = 0; i < kInputs && o.pass; ++i) {
    const auto m = random_sound_multilog(rng);
    const auto c = propose_conservative(m);
    const auto rc = check_proposal_requirements(m, c);
    o.require(rc.ok(), "conservative on " + to_string(m) + ": " +
                           (rc.ok() ? "" : rc.violations.front()));
    const auto p = propose_optimizing(m);
    const auto rp = check_proposal_requirements(m, p);
    o.require(rp.ok(), "optimizing on " + to_string(m) + ": " +
                           (rp.ok() ? "" : rp.violations.front()));
    const auto maximal = distinct_maximal_schedules(c);
    o.require(maximal == 1, std::to_string(maximal) + " maximal schedules for " + to_string(c));
  }
  if (o.pass)
    o.detail = std::to_string(kInputs) + " inputs; conservative output has one maximal schedule";
  return o;
}

Outcome optimizer_dominance() {
  Outcome o;
  Rng rng(6);
  constexpr int kInputs = 1000;
  std::size_t strictly_better = 0;
  for (int i = 0; i < kInputs && o.pass; ++i) {
    const auto m = random_sound_multilog(rng);
    const auto c = dead_count(propose_conservative(m));
    const auto p = dead_count(propose_optimizing(m));
    o.require(p <= c, "optimizer kills " + std::to_string(p) + " > " + std::to_string(c) +
                          " on " + to_string(m));
    strictly_better += p < c;
  }
  // T1 and T3 antagonistic, T4 caused by T1.
  const ActionId t3{1, 1}, t1{2, 1}, t4{2, 2};
  Multilog m;
  for (auto a : {t1, t3, t4}) m.add_action(a);
  m.add_not_after(t1, t3);
  m.add_not_after(t3, t1);
  m.add_not_after(t1, t4);
  m.add_enables(t1, t4);
  const auto c = dead_count(propose_conservative(m));
  const auto p = dead_count(propose_optimizing(m));
  o.require(c == 2 && p == 1, "T1/T3/T4: conservative " + std::to_string(c) + ", optimizer " +
                                  std::to_string(p));
  if (o.pass)
    o.detail = "never worse on " + std::to_string(kInputs) + " inputs (better on " +
               std::to_string(strictly_better) + "); T1/T3/T4 dead 2 vs 1";
  return o;
}

Outcome message_cost() {
  Outcome o;
  constexpr std::size_t kSites = 4;
  constexpr std::size_t kBatchesPerSite = 3;
  std::ostringstream d;
  double previous = 0;
  for (std::size_t batch = 1; batch <= 10; ++batch) {
    const auto sc = batch_scenario(kSites, kBatchesPerSite * batch, batch, 11);
    const auto r = run(sc);
    o.require(r.quiescent, "d=" + std::to_string(batch) + " did not quiesce");
    const auto m = metrics(r.trace, kSites);
    o.require(m.committed == sc.submissions.size(), "d=" + std::to_string(batch) +
                                                        " left actions uncommitted");
    const double cost = m.active_messages_per_committed;
    if (batch > 1)
      o.require(cost < previous, "d=" + std::to_string(batch) + " costs " + std::to_string(cost) +
                                     " >= " + std::to_string(previous));
    previous = cost;
    d << (batch > 1 ? " " : "") << cost;
  }
  if (o.pass) o.detail = "n=4, messages per committed action for d=1..10: " + d.str();
  return o;
}

std::set<OracleEdge> edge_set(std::vector<OracleEdge> edges) {
  std::set<OracleEdge> out;
  for (auto e : edges) {
    if (e.kind == EdgeKind::non_commuting && e.to < e.from) std::swap(e.from, e.to);
    out.insert(e);
  }
  return out;
}

Outcome table_conformance() {
  Outcome o;
  const auto db = ConstraintOracle::serializable_db();
  const ActionId a{1, 1}, b{2, 1};
  auto txn = [](ActionId id, std::set<std::string> r, std::set<std::string> w,
                std::set<std::string> i = {}) {
    return Action{id, "", DbPayload{std::move(r), std::move(w), std::move(i)}, {}};
  };
  enum Order { a_first, concurrent, b_first };
  auto check = [&](const std::string& name, Action x, Action y, Order order,
                   const std::set<OracleEdge>& expected) {
    if (order == a_first) y.submit_vv.observe(x.id);
    if (order == b_first) x.submit_vv.observe(y.id);
    const auto got = edge_set(db.constraints(x, y));
    o.require(got == expected, name + " mismatch");
    o.require(edge_set(db.constraints(y, x)) == got, name + " not symmetric");
  };
  using E = OracleEdge;
  const auto na = EdgeKind::not_after, en = EdgeKind::enables, nc = EdgeKind::non_commuting;
  // T reads what T' writes.
  const auto rt = txn(a, {"x"}, {}), wt = txn(b, {}, {"x"});
  check("read-write, T first", rt, wt, a_first, {E{na, a, b}});
  check("read-write, concurrent", rt, wt, concurrent, {E{na, a, b}});
  check("read-write, T' first", rt, wt, b_first, {E{na, b, a}, E{en, b, a}});
  // Both write.
  const auto w1 = txn(a, {}, {"x"}), w2 = txn(b, {}, {"x"});
  check("write-write, T first", w1, w2, a_first, {E{na, a, b}});
  check("write-write, concurrent", w1, w2, concurrent, {E{nc, a, b}});
  check("write-write, T' first", w1, w2, b_first, {E{na, b, a}});
  // Disjoint read and write sets.
  const auto d1 = txn(a, {"x"}, {"y"}), d2 = txn(b, {"z"}, {"w"});
  check("disjoint, T first", d1, d2, a_first, {});
  check("disjoint, concurrent", d1, d2, concurrent, {});
  check("disjoint, T' first", d1, d2, b_first, {});

  // The worked transactions.
  const ActionId t1{1, 1}, t2{2, 1}, t3{3, 1}, t4{1, 2}, t6{1, 3}, t8{3, 3};
  const auto T1 = txn(t1, {"x"}, {"z"});
  check("T1/T2", T1, txn(t2, {}, {"x"}), concurrent, {E{na, t1, t2}});
  check("T1/T3", T1, txn(t3, {"z"}, {"x"}), concurrent, {E{na, t1, t3}, E{na, t3, t1}});
  check("T1/T4", T1, txn(t4, {"z"}, {}), a_first, {E{na, t1, t4}, E{en, t1, t4}});
  check("T6/T8", txn(t6, {}, {}, {"acct"}), txn(t8, {}, {"acct"}), concurrent, {E{nc, t6, t8}});
  if (o.pass) o.detail = "9 cells and T1/T2, T1/T3, T1/T4, T6/T8 match";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"worked example", worked_example},
      {"classification matches schedule oracle", equivalence},
      {"safety under faults", safety},
      {"liveness under fair runs", liveness},
      {"proposer requirements", proposer_contract},
      {"optimizer dominance", optimizer_dominance},
      {"message cost falls with batch size", message_cost},
      {"database oracle table", table_conformance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = criteria[i].second();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.budget > 0 && secs >= o.budget) {
      o.pass = false;
      o.detail = "took " + std::to_string(secs) + " s, budget " + std::to_string(o.budget) + " s";
    }
    failed += !o.pass;
    std::printf("criterion %zu %-40s %s  %.2fs  %s\n", i + 1, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
