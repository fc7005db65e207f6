#include "semcommit/trace.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace semcommit {

namespace {

const char* const kKindNames[] = {"submit",  "send",    "deliver", "drop",    "crash",
                                  "recover", "propose", "elect",   "schedule"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T number(const std::string& s, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
    throw TraceParseError(std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::shared_ptr<const Multilog> multilog_field(const std::string& s) {
  auto m = parse_multilog(s);
  if (!m) throw TraceParseError("bad multilog '" + s + "'");
  return std::make_shared<const Multilog>(std::move(*m));
}

Vote vote_field(const std::string& s) {
  auto v = parse_vote(s);
  if (!v) throw TraceParseError("bad vote '" + s + "'");
  return *v;
}

std::string ids_text(const std::vector<ActionId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += to_string(ids[i]);
  }
  return out;
}

struct Writer {
  std::ostringstream& out;
  void operator()(const std::monostate&) const {}
  void operator()(const SubmitInfo& s) const { out << "\tactions=" << ids_text(s.actions); }
  void operator()(const MessageInfo& m) const {
    out << "\tmsg=" << m.message << "\tfrom=" << m.from << "\tto=" << m.to;
    if (!m.reason.empty()) out << "\treason=" << m.reason;
  }
  void operator()(const ProposeInfo& p) const {
    out << "\tts=" << p.ts << "\tproposal=" << (p.proposal ? to_string(*p.proposal) : "");
  }
  void operator()(const ElectInfo& e) const {
    out << "\tsource=" << e.source << "\tts=" << e.ts << "\ttally=" << to_string(e.tally)
        << "\tcotally=" << to_string(e.cotally) << "\tagainst=" << to_string(e.against)
        << "\topponents=";
    for (std::size_t i = 0; i < e.opponents.size(); ++i) {
      if (i) out << ',';
      out << e.opponents[i].source << ':' << to_string(e.opponents[i].tally);
    }
    out << "\tevaluated=" << e.evaluated
        << "\tcandidate=" << (e.candidate ? to_string(*e.candidate) : "");
  }
  void operator()(const ScheduleInfo& s) const {
    out << "\tschedule=" << to_string(s.schedule)
        << "\tmultilog=" << (s.multilog ? to_string(*s.multilog) : "");
  }
};

}  // namespace

std::string to_string(EventKind k) { return kKindNames[static_cast<int>(k)]; }

std::string format_event(const TraceEvent& e) {
  std::ostringstream out;
  out << e.index << '\t' << e.tick << '\t' << e.site << '\t' << to_string(e.kind);
  std::visit(Writer{out}, e.payload);
  return out.str();
}

void write_trace(std::ostream& out, const Trace& t) {
  for (const auto& e : t) out << format_event(e) << '\n';
}

TraceEvent parse_event(const std::string& line) {
  const auto cols = split(line, '\t');
  if (cols.size() < 4) throw TraceParseError("too few columns");
  TraceEvent e;
  e.index = number<std::uint64_t>(cols[0], "index");
  e.tick = number<std::uint64_t>(cols[1], "tick");
  e.site = number<SiteId>(cols[2], "site");
  bool found = false;
  for (int k = 0; k < 9; ++k) {
    if (cols[3] == kKindNames[k]) {
      e.kind = static_cast<EventKind>(k);
      found = true;
    }
  }
  if (!found) throw TraceParseError("unknown event kind '" + cols[3] + "'");
  std::map<std::string, std::string> f;
  for (std::size_t i = 4; i < cols.size(); ++i) {
    const auto eq = cols[i].find('=');
    if (eq == std::string::npos) throw TraceParseError("field without '=': '" + cols[i] + "'");
    f[cols[i].substr(0, eq)] = cols[i].substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = f.find(key);
    if (it == f.end()) throw TraceParseError(std::string("missing field '") + key + "'");
    return it->second;
  };
  switch (e.kind) {
    case EventKind::submit: {
      SubmitInfo s;
      const auto& text = get("actions");
      if (!text.empty()) {
        for (const auto& item : split(text, ',')) {
          auto id = parse_action_id(item);
          if (!id) throw TraceParseError("bad action id '" + item + "'");
          s.actions.push_back(*id);
        }
      }
      e.payload = std::move(s);
      break;
    }
    case EventKind::send:
    case EventKind::deliver:
    case EventKind::drop: {
      MessageInfo m;
      m.message = number<std::uint64_t>(get("msg"), "message id");
      m.from = number<SiteId>(get("from"), "site");
      m.to = number<SiteId>(get("to"), "site");
      if (auto it = f.find("reason"); it != f.end()) m.reason = it->second;
      e.payload = std::move(m);
      break;
    }
    case EventKind::crash:
    case EventKind::recover:
      break;
    case EventKind::propose:
      e.payload = ProposeInfo{number<std::uint64_t>(get("ts"), "timestamp"),
                              multilog_field(get("proposal"))};
      break;
    case EventKind::elect: {
      ElectInfo el;
      el.source = number<SiteId>(get("source"), "site");
      el.ts = number<std::uint64_t>(get("ts"), "timestamp");
      el.tally = vote_field(get("tally"));
      el.cotally = vote_field(get("cotally"));
      el.against = vote_field(get("against"));
      const auto& opp = get("opponents");
      if (!opp.empty()) {
        for (const auto& item : split(opp, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw TraceParseError("bad opponent '" + item + "'");
          el.opponents.push_back({number<SiteId>(item.substr(0, colon), "site"),
                                  vote_field(item.substr(colon + 1))});
        }
      }
      el.evaluated = number<std::size_t>(get("evaluated"), "count");
      el.candidate = multilog_field(get("candidate"));
      e.payload = std::move(el);
      break;
    }
    case EventKind::schedule: {
      auto s = parse_schedule(get("schedule"));
      if (!s) throw TraceParseError("bad schedule '" + get("schedule") + "'");
      e.payload = ScheduleInfo{std::move(*s), multilog_field(get("multilog"))};
      break;
    }
  }
  return e;
}

Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      t.push_back(parse_event(line));
    } catch (const TraceParseError& err) {
      throw TraceParseError("line " + std::to_string(lineno) + ": " + err.what());
    }
  }
  return t;
}

}  // namespace semcommit
