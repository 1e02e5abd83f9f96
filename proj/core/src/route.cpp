#include "pvstab/route.hpp"

#include <charconv>
#include <stdexcept>

namespace pvstab {

AsPath AsPath::parse(std::string_view text) {
  AsPath out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (pos == text.size()) break;
    std::size_t end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto token = text.substr(pos, end - pos);
    Asn asn = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), asn);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw std::invalid_argument("bad ASN '" + std::string(token) + "'");
    }
    out.hops.push_back(asn);
    pos = end;
  }
  return out;
}

std::string AsPath::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(hops[i]);
  }
  return out;
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::Igp: return "IGP";
    case Origin::Egp: return "EGP";
    case Origin::Incomplete: return "INCOMPLETE";
  }
  return "INCOMPLETE";
}

std::optional<Origin> parse_origin(std::string_view text) {
  if (text == "IGP") return Origin::Igp;
  if (text == "EGP") return Origin::Egp;
  if (text == "INCOMPLETE") return Origin::Incomplete;
  return std::nullopt;
}

void UpdateRecord::validate() const {
  if (kind == UpdateKind::Withdraw) {
    if (!path.empty()) throw std::invalid_argument("withdraw carries an AS path");
    if (!attrs.empty()) throw std::invalid_argument("withdraw carries attributes");
  } else if (path.empty()) {
    throw std::invalid_argument("announce has an empty AS path");
  }
}

PeerOrdinal PeerRegistry::intern(std::string_view id) {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  const PeerOrdinal ord{static_cast<std::uint32_t>(names_.size())};
  names_.emplace_back(id);
  index_.emplace(std::string(id), ord);
  return ord;
}

std::optional<PeerOrdinal> PeerRegistry::find(std::string_view id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

}  // namespace pvstab
