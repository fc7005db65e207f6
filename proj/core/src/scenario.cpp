#include "semcommit/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace semcommit {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

template <typename T>
bool parse_uint(const std::string& s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && p == s.data() + s.size();
}

bool parse_prob(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::set<std::string> split_names(const std::string& s) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    auto item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.insert(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string names(const std::set<std::string>& s) {
  std::string out;
  for (const auto& n : s) {
    if (!out.empty()) out += ',';
    out += n;
  }
  return out;
}

std::optional<ProposerKind> parse_proposer(const std::vector<std::string>& w, std::size_t at) {
  if (at >= w.size()) return std::nullopt;
  if (w[at] == "conservative" && w.size() == at + 1) return Conservative{};
  if (w[at] == "optimizing") {
    Optimizing o;
    if (w.size() == at + 2 && !parse_uint(w[at + 1], o.budget)) return std::nullopt;
    if (w.size() > at + 2) return std::nullopt;
    return o;
  }
  return std::nullopt;
}

std::string proposer_text(const ProposerKind& p) {
  if (std::holds_alternative<Conservative>(p)) return "conservative";
  return "optimizing " + std::to_string(std::get<Optimizing>(p).budget);
}

std::optional<SchedulePolicy> parse_policy(const std::string& s) {
  if (s == "canonical-greedy") return SchedulePolicy::canonical_greedy;
  if (s == "maximize-actions") return SchedulePolicy::maximize_actions;
  if (s == "submission-order") return SchedulePolicy::submission_order;
  return std::nullopt;
}

std::string policy_text(SchedulePolicy p) {
  switch (p) {
    case SchedulePolicy::canonical_greedy:
      return "canonical-greedy";
    case SchedulePolicy::maximize_actions:
      return "maximize-actions";
    case SchedulePolicy::submission_order:
      return "submission-order";
  }
  return "?";
}

std::string prob_text(double p) {
  std::ostringstream out;
  out << p;
  return out.str();
}

}  // namespace

InvalidScenario::InvalidScenario(std::vector<std::string> causes)
    : std::runtime_error("invalid scenario: " + join(causes)), causes_(std::move(causes)) {}

const ProposerKind& Scenario::proposer_for(SiteId site) const {
  if (site >= 1 && site <= proposers.size() && proposers[site - 1]) return *proposers[site - 1];
  return default_proposer;
}

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::vector<std::string> errors;
  std::vector<CalendarRule> rules;
  std::string oracle_kind = "independent";
  std::vector<std::pair<SiteId, ProposerKind>> overrides;
  std::string section;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    errors.push_back("line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto w = words(line);
    if (w.empty()) continue;
    if (w[0].front() == '[') {
      if (w.size() != 1 || w[0].back() != ']') {
        fail("malformed section header");
        continue;
      }
      section = w[0].substr(1, w[0].size() - 2);
      static const std::set<std::string> known{"sites",   "weights", "oracle",   "submissions",
                                               "gossip",  "faults",  "proposer", "seed",
                                               "horizon"};
      if (!known.contains(section)) fail("unknown section [" + section + "]");
      continue;
    }
    if (section == "sites") {
      if (w.size() != 1 || !parse_uint(w[0], sc.sites)) fail("expected a site count");
    } else if (section == "weights") {
      for (const auto& item : w) {
        auto weight = parse_weight(item);
        if (!weight) {
          fail("bad weight '" + item + "'");
        } else {
          sc.weights.push_back(*weight);
        }
      }
    } else if (section == "seed") {
      if (w.size() != 1 || !parse_uint(w[0], sc.seed)) fail("expected an integer seed");
    } else if (section == "horizon") {
      if (w.size() != 1 || !parse_uint(w[0], sc.horizon)) fail("expected an event count");
    } else if (section == "oracle") {
      if (w.size() == 1) {
        oracle_kind = w[0];
        if (oracle_kind != "independent" && oracle_kind != "calendar" &&
            oracle_kind != "serializable-db")
          fail("unknown oracle '" + oracle_kind + "'");
        continue;
      }
      if (w.size() != 3) {
        fail("expected '<kind> <label> <label>'");
        continue;
      }
      const auto& k = w[0];
      if (k == "not_after") {
        rules.push_back({EdgeKind::not_after, w[1], w[2]});
      } else if (k == "enables") {
        rules.push_back({EdgeKind::enables, w[1], w[2]});
      } else if (k == "non_commuting") {
        rules.push_back({EdgeKind::non_commuting, w[1], w[2]});
      } else if (k == "antagonism") {
        rules.push_back({EdgeKind::not_after, w[1], w[2]});
        rules.push_back({EdgeKind::not_after, w[2], w[1]});
      } else if (k == "cause") {
        rules.push_back({EdgeKind::not_after, w[1], w[2]});
        rules.push_back({EdgeKind::enables, w[1], w[2]});
      } else {
        fail("unknown rule kind '" + k + "'");
      }
    } else if (section == "submissions") {
      Submission s;
      if (w.size() < 5 || w[0] != "at" || !parse_uint(w[1], s.tick) || w[2] != "site" ||
          !parse_uint(w[3], s.site)) {
        fail("expected 'at <tick> site <s> <label> [r=..] [w=..] [i=..]'");
        continue;
      }
      s.label = w[4];
      for (std::size_t i = 5; i < w.size(); ++i) {
        const auto& f = w[i];
        if (f.size() < 2 || f[1] != '=') {
          fail("bad field '" + f + "'");
          continue;
        }
        if (!s.db) s.db = DbPayload{};
        auto set = split_names(f.substr(2));
        switch (f[0]) {
          case 'r':
            s.db->read_set.insert(set.begin(), set.end());
            break;
          case 'w':
            s.db->write_set.insert(set.begin(), set.end());
            break;
          case 'i':
            s.db->increment_set.insert(set.begin(), set.end());
            break;
          default:
            fail("bad field '" + f + "'");
        }
      }
      sc.submissions.push_back(std::move(s));
    } else if (section == "gossip") {
      auto& g = sc.gossip;
      bool ok = w.size() == 2;
      if (w[0] == "period" && ok) {
        ok = parse_uint(w[1], g.period);
      } else if (w[0] == "latency" && ok) {
        ok = parse_uint(w[1], g.latency);
      } else if (w[0] == "jitter" && ok) {
        ok = parse_uint(w[1], g.jitter);
      } else if (w[0] == "delta" && ok) {
        ok = w[1] == "on" || w[1] == "off";
        g.delta = w[1] == "on";
      } else if (w[0] == "send" && w.size() == 4) {
        ScriptedSend s;
        ok = parse_uint(w[1], s.tick) && parse_uint(w[2], s.from) && parse_uint(w[3], s.to);
        g.script.push_back(s);
      } else {
        ok = false;
      }
      if (!ok) fail("bad gossip setting");
    } else if (section == "faults") {
      auto& f = sc.faults;
      bool ok = false;
      if (w.size() == 2 && w[0] == "drop") {
        ok = parse_prob(w[1], f.drop);
      } else if (w.size() == 2 && w[0] == "duplicate") {
        ok = parse_prob(w[1], f.duplicate);
      } else if (w.size() == 2 && w[0] == "reorder") {
        ok = parse_prob(w[1], f.reorder);
      } else if (w.size() == 2 && w[0] == "drop-message") {
        std::uint64_t id = 0;
        ok = parse_uint(w[1], id);
        f.drop_messages.push_back(id);
      } else if (w.size() == 5 && w[0] == "crash" && w[2] == "at" && w[4] == "forever") {
        Crash c;
        ok = parse_uint(w[1], c.site) && parse_uint(w[3], c.at);
        f.crashes.push_back(c);
      } else if (w.size() == 6 && w[0] == "crash" && w[2] == "at" && w[4] == "for") {
        Crash c;
        std::uint64_t d = 0;
        ok = parse_uint(w[1], c.site) && parse_uint(w[3], c.at) && parse_uint(w[5], d);
        c.duration = d;
        f.crashes.push_back(c);
      }
      if (!ok) fail("bad fault setting");
    } else if (section == "proposer") {
      if (w[0] == "default") {
        if (auto p = parse_proposer(w, 1)) {
          sc.default_proposer = *p;
        } else {
          fail("bad proposer");
        }
      } else if (w[0] == "site" && w.size() >= 3) {
        SiteId s = 0;
        auto p = parse_proposer(w, 2);
        if (!parse_uint(w[1], s) || !p) {
          fail("bad proposer");
        } else {
          overrides.emplace_back(s, *p);
        }
      } else if (w[0] == "schedule" && w.size() == 2) {
        if (auto p = parse_policy(w[1])) {
          sc.schedule_policy = *p;
        } else {
          fail("unknown schedule policy '" + w[1] + "'");
        }
      } else {
        fail("bad proposer setting");
      }
    } else {
      fail("content outside a section");
    }
  }
  if (oracle_kind == "calendar") {
    sc.oracle = ConstraintOracle::calendar(std::move(rules));
  } else if (!rules.empty()) {
    errors.push_back("rules are only allowed for the calendar oracle");
  } else if (oracle_kind == "serializable-db") {
    sc.oracle = ConstraintOracle::serializable_db();
    for (auto& s : sc.submissions)
      if (!s.db) s.db = DbPayload{};
  }
  sc.proposers.resize(sc.sites);
  for (const auto& [site, p] : overrides) {
    if (site < 1 || site > sc.sites) {
      errors.push_back("proposer override for unknown site " + std::to_string(site));
    } else {
      sc.proposers[site - 1] = p;
    }
  }
  std::stable_sort(sc.submissions.begin(), sc.submissions.end(),
                   [](const Submission& a, const Submission& b) { return a.tick < b.tick; });
  if (!errors.empty()) throw InvalidScenario(errors);
  return sc;
}

Scenario parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

std::vector<std::string> validate(const Scenario& sc) {
  std::vector<std::string> causes;
  const auto n = sc.sites;
  if (n == 0) causes.push_back("at least one site is required");
  if (sc.weights.size() != n) {
    causes.push_back("expected " + std::to_string(n) + " weights, found " +
                     std::to_string(sc.weights.size()));
  } else {
    Weight sum{0};
    for (const auto& w : sc.weights) sum += w;
    if (sum != Weight{1}) causes.push_back("weights sum to " + to_string(sum) + ", not 1");
  }
  auto bad_site = [&](SiteId s) { return s < 1 || s > n; };
  for (const auto& s : sc.submissions)
    if (bad_site(s.site)) causes.push_back("submission for unknown site " + std::to_string(s.site));
  for (const auto& s : sc.gossip.script) {
    if (bad_site(s.from) || bad_site(s.to) || s.from == s.to)
      causes.push_back("bad scripted send " + std::to_string(s.from) + "->" + std::to_string(s.to));
  }
  for (const auto& c : sc.faults.crashes)
    if (bad_site(c.site)) causes.push_back("crash of unknown site " + std::to_string(c.site));
  if (sc.gossip.period == 0) causes.push_back("gossip period must be positive");
  if (sc.gossip.latency == 0) causes.push_back("gossip latency must be positive");
  if (sc.horizon == 0) causes.push_back("horizon must be positive");
  for (double p : {sc.faults.drop, sc.faults.duplicate, sc.faults.reorder})
    if (!(p >= 0.0 && p <= 1.0)) causes.push_back("probability out of [0,1]");

  if (sc.oracle.kind() == ConstraintOracle::Kind::calendar) {
    std::map<std::string, std::vector<const Submission*>> by_label;
    for (const auto& s : sc.submissions) by_label[s.label].push_back(&s);
    for (const auto& r : sc.oracle.rules()) {
      for (const auto* l : {&r.from, &r.to})
        if (!by_label.contains(*l)) causes.push_back("rule names unsubmitted label '" + *l + "'");
      if (r.kind != EdgeKind::enables || !by_label.contains(r.from) || !by_label.contains(r.to))
        continue;
      for (const auto* b : by_label[r.to]) {
        const bool ok = std::any_of(by_label[r.from].begin(), by_label[r.from].end(),
                                    [&](const Submission* a) {
                                      return a->site == b->site && a->tick <= b->tick;
                                    });
        if (!ok)
          causes.push_back("enables rule " + r.from + "->" + r.to +
                           " needs the enabler submitted earlier at the same site");
      }
    }
  }

  if (causes.empty()) {
    // Oracle soundness over the declared actions.
    std::map<SiteId, std::uint32_t> seq;
    std::vector<Action> actions;
    for (const auto& s : sc.submissions) {
      Action a;
      a.id = ActionId{s.site, ++seq[s.site]};
      a.label = s.label;
      a.db = s.db;
      a.submit_vv.observe(a.id);
      actions.push_back(std::move(a));
    }
    Multilog m;
    for (const auto& a : actions) m.add_action(a.id);
    for (std::size_t i = 0; i < actions.size(); ++i)
      for (std::size_t j = i + 1; j < actions.size(); ++j)
        add_edges(m, sc.oracle.constraints(actions[i], actions[j]));
    if (!is_sound(m)) causes.push_back("oracle constraints over the declared actions are unsound");
  }
  return causes;
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream out;
  out << "[sites]\n" << sc.sites << "\n\n[weights]\n";
  for (std::size_t i = 0; i < sc.weights.size(); ++i)
    out << (i ? " " : "") << to_string(sc.weights[i]);
  out << "\n\n[oracle]\n" << to_string(sc.oracle.kind()) << '\n';
  for (const auto& r : sc.oracle.rules())
    out << to_string(r.kind) << ' ' << r.from << ' ' << r.to << '\n';
  out << "\n[submissions]\n";
  for (const auto& s : sc.submissions) {
    out << "at " << s.tick << " site " << s.site << ' ' << s.label;
    if (s.db) {
      if (!s.db->read_set.empty()) out << " r=" << names(s.db->read_set);
      if (!s.db->write_set.empty()) out << " w=" << names(s.db->write_set);
      if (!s.db->increment_set.empty()) out << " i=" << names(s.db->increment_set);
    }
    out << '\n';
  }
  const auto& g = sc.gossip;
  out << "\n[gossip]\nperiod " << g.period << "\nlatency " << g.latency << "\njitter "
      << g.jitter << "\ndelta " << (g.delta ? "on" : "off") << '\n';
  for (const auto& s : g.script) out << "send " << s.tick << ' ' << s.from << ' ' << s.to << '\n';
  const auto& f = sc.faults;
  out << "\n[faults]\ndrop " << prob_text(f.drop) << "\nduplicate " << prob_text(f.duplicate)
      << "\nreorder " << prob_text(f.reorder) << '\n';
  for (auto id : f.drop_messages) out << "drop-message " << id << '\n';
  for (const auto& c : f.crashes) {
    out << "crash " << c.site << " at " << c.at;
    if (c.duration) {
      out << " for " << *c.duration << '\n';
    } else {
      out << " forever\n";
    }
  }
  out << "\n[proposer]\ndefault " << proposer_text(sc.default_proposer) << '\n';
  for (std::size_t i = 0; i < sc.proposers.size(); ++i)
    if (sc.proposers[i]) out << "site " << i + 1 << ' ' << proposer_text(*sc.proposers[i]) << '\n';
  out << "schedule " << policy_text(sc.schedule_policy) << '\n';
  out << "\n[seed]\n" << sc.seed << "\n\n[horizon]\n" << sc.horizon << '\n';
  return out.str();
}

bool is_fair(const Scenario& sc) {
  if (sc.faults.drop >= 1.0) return false;
  return std::none_of(sc.faults.crashes.begin(), sc.faults.crashes.end(),
                      [](const Crash& c) { return !c.duration.has_value(); });
}

}  // namespace semcommit
