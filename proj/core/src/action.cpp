#include "semcommit/action.hpp"

#include <charconv>
#include <sstream>

namespace semcommit {

std::string to_string(ActionId id) {
  return std::to_string(id.site) + "." + std::to_string(id.seq);
}

std::optional<ActionId> parse_action_id(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  ActionId id;
  const auto* first = text.data();
  const auto* mid = first + dot;
  const auto* last = first + text.size();
  auto [p1, e1] = std::from_chars(first, mid, id.site);
  if (e1 != std::errc{} || p1 != mid || dot == 0) return std::nullopt;
  auto [p2, e2] = std::from_chars(mid + 1, last, id.seq);
  if (e2 != std::errc{} || p2 != last || mid + 1 == last) return std::nullopt;
  return id;
}

std::uint32_t VersionVector::get(SiteId site) const {
  auto it = counts_.find(site);
  return it == counts_.end() ? 0 : it->second;
}

void VersionVector::set(SiteId site, std::uint32_t count) {
  if (count == 0) {
    counts_.erase(site);
  } else {
    counts_[site] = count;
  }
}

void VersionVector::observe(ActionId id) {
  if (id == kInit) return;
  auto& slot = counts_[id.site];
  if (slot < id.seq) slot = id.seq;
}

void VersionVector::merge(const VersionVector& other) {
  for (const auto& [site, count] : other.counts_) {
    auto& slot = counts_[site];
    if (slot < count) slot = count;
  }
}

std::string to_string(const VersionVector& vv) {
  std::ostringstream out;
  out << '[';
  bool first = true;
  for (const auto& [site, count] : vv.entries()) {
    if (!first) out << ',';
    first = false;
    out << site << ':' << count;
  }
  out << ']';
  return out.str();
}

bool happens_before(const Action& a, const Action& b) {
  return a.id != b.id && b.submit_vv.covers(a.id);
}

bool concurrent(const Action& a, const Action& b) {
  return !happens_before(a, b) && !happens_before(b, a);
}

}  // namespace semcommit
