// semcommit: validate scenarios, run simulations, check traces.
//
// Exit codes:
//   0  success
//   1  usage error
//   2  I/O error
//   3  invalid scenario
//   4  a checker failed
//   5  trace could not be parsed

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "semcommit/checkers.hpp"
#include "semcommit/scenario.hpp"
#include "semcommit/simulator.hpp"
#include "semcommit/trace.hpp"

namespace {

using namespace semcommit;

enum Exit { ok = 0, usage = 1, io = 2, invalid = 3, check_failed = 4, bad_trace = 5 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string checks = "all";
  std::string format = "text";
};

Scenario load(const Options& o) {
  std::ifstream in(o.scenario);
  if (!in) throw IoError("cannot open scenario '" + o.scenario + "'");
  Scenario sc = parse_scenario(in);
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  return read_trace(in);
}

int report_invalid(const std::vector<std::string>& causes) {
  for (const auto& c : causes) std::cerr << "invalid scenario: " << c << '\n';
  return invalid;
}

int cmd_validate(const Options& o) {
  const auto sc = load(o);
  if (auto causes = validate(sc); !causes.empty()) return report_invalid(causes);
  if (o.format == "records") {
    std::cout << "valid\tsites=" << sc.sites << "\tsubmissions=" << sc.submissions.size()
              << "\toracle=" << to_string(sc.oracle.kind()) << '\n';
  } else {
    std::cout << o.scenario << ": valid (" << sc.sites << " sites, " << sc.submissions.size()
              << " submissions, " << to_string(sc.oracle.kind()) << " oracle)\n";
  }
  return ok;
}

int cmd_run(const Options& o) {
  const auto sc = load(o);
  const auto result = run(sc);
  if (!o.trace.empty()) {
    std::ofstream out(o.trace);
    if (!out) throw IoError("cannot write trace '" + o.trace + "'");
    write_trace(out, result.trace);
    if (!out) throw IoError("failed writing trace '" + o.trace + "'");
  }
  if (o.format == "records") {
    if (o.trace.empty()) write_trace(std::cout, result.trace);
    return ok;
  }
  std::cout << "events " << result.trace.size() << ", processed " << result.processed
            << ", last tick " << result.last_tick << ", "
            << (result.quiescent ? "quiescent" : "horizon reached") << '\n';
  for (std::size_t i = 0; i < result.finals.size(); ++i)
    std::cout << "site " << i + 1 << ": " << to_string(result.finals[i]) << '\n';
  return ok;
}

int cmd_check(const Options& o) {
  const auto t = load_trace(o.trace);
  std::vector<std::pair<std::string, Verdict>> verdicts;
  if (o.checks == "all" || o.checks == "safety") {
    verdicts.emplace_back("local-soundness", check_local_soundness(t));
    verdicts.emplace_back("mergeability", check_mergeability(t));
  }
  if (o.checks == "all" || o.checks == "liveness") {
    if (o.scenario.empty()) {
      verdicts.emplace_back("liveness",
                            Verdict{Verdict::Status::not_applicable, "no --scenario given"});
    } else {
      verdicts.emplace_back("liveness", check_liveness(t, load(o)));
    }
  }
  bool all = true;
  for (const auto& [name, v] : verdicts) {
    all &= v.passed();
    if (o.format == "records") {
      std::cout << name << '\t' << to_string(v.status);
      if (!v.detail.empty()) std::cout << '\t' << v.detail;
      std::cout << '\n';
    } else {
      std::cout << name << ": " << to_string(v.status);
      if (!v.detail.empty()) std::cout << " (" << v.detail << ')';
      std::cout << '\n';
    }
  }
  return all ? ok : check_failed;
}

int cmd_metrics(const Options& o) {
  const auto t = load_trace(o.trace);
  std::size_t sites = 0;
  if (!o.scenario.empty()) {
    sites = load(o).sites;
  } else {
    for (const auto& e : t) sites = std::max<std::size_t>(sites, e.site);
  }
  const auto m = metrics(t, sites);
  if (o.format == "records") {
    std::cout << "sites=" << m.sites << "\tmessages=" << m.messages
              << "\tactive_messages=" << m.active_messages << "\tdelivered=" << m.delivered
              << "\tdropped=" << m.dropped << "\tsubmitted=" << m.submitted
              << "\tdecided=" << m.decided << "\tcommitted=" << m.committed
              << "\taborted=" << m.aborted << "\telections=" << m.elections
              << "\tcandidates=" << m.candidates_evaluated
              << "\tlatency=" << m.mean_decision_latency
              << "\tmessages_per_decided=" << m.messages_per_decided
              << "\tactive_per_committed=" << m.active_messages_per_committed
              << "\tbatch_degree=" << m.batch_degree << '\n';
  } else {
    std::cout << render_metrics(m);
  }
  return ok;
}

int cmd_explain(const Options& o) {
  std::cout << render_explain(load_trace(o.trace));
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic commitment simulator and trace checker"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"text", "records"}));
  };
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a scenario");
  validate_cmd->add_option("--scenario", o.scenario, "Scenario file")->required();
  add_format(validate_cmd);

  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write its trace");
  run_cmd->add_option("--scenario", o.scenario, "Scenario file")->required();
  run_cmd->add_option("--trace", o.trace, "Trace output file");
  run_cmd->add_option("--seed", o.seed, "Override the scenario seed");
  add_format(run_cmd);

  auto* check_cmd = app.add_subcommand("check", "Run consistency checkers over a trace");
  check_cmd->add_option("--trace", o.trace, "Trace file")->required();
  check_cmd->add_option("--scenario", o.scenario, "Scenario file, needed for liveness");
  check_cmd->add_option("--checks", o.checks, "Checkers to run")
      ->check(CLI::IsMember({"all", "safety", "liveness"}));
  add_format(check_cmd);

  auto* metrics_cmd = app.add_subcommand("metrics", "Print message and decision metrics");
  metrics_cmd->add_option("--trace", o.trace, "Trace file")->required();
  metrics_cmd->add_option("--scenario", o.scenario, "Scenario file");
  add_format(metrics_cmd);

  auto* explain_cmd = app.add_subcommand("explain", "Narrate each election in a trace");
  explain_cmd->add_option("--trace", o.trace, "Trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*validate_cmd) return cmd_validate(o);
    if (*run_cmd) return cmd_run(o);
    if (*check_cmd) return cmd_check(o);
    if (*metrics_cmd) return cmd_metrics(o);
    if (*explain_cmd) return cmd_explain(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io;
  } catch (const InvalidScenario& e) {
    return report_invalid(e.causes());
  } catch (const TraceParseError& e) {
    std::cerr << "trace parse error: " << e.what() << '\n';
    return bad_trace;
  }
  return usage;
}
