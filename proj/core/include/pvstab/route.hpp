#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pvstab/prefix.hpp"

namespace pvstab {

using Asn = std::uint32_t;

/// Ordered AS hops as received from a peer, first hop first. An empty path
/// is the withdrawn state.
struct AsPath {
  std::vector<Asn> hops;

  bool empty() const { return hops.empty(); }
  std::size_t length() const { return hops.size(); }
  std::optional<Asn> first_hop() const {
    if (hops.empty()) return std::nullopt;
    return hops.front();
  }

  /// Space-separated ASNs; throws std::invalid_argument on a bad token.
  static AsPath parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const AsPath&, const AsPath&) = default;
};

enum class Origin : std::uint8_t { Igp = 0, Egp = 1, Incomplete = 2 };

std::string_view to_string(Origin o);
std::optional<Origin> parse_origin(std::string_view text);

struct AttributeSet {
  std::optional<Origin> origin;
  std::optional<std::uint32_t> med;
  std::optional<std::uint32_t> local_pref;
  std::optional<std::vector<std::uint32_t>> communities;
  std::optional<IpAddress> next_hop;

  bool empty() const {
    return !origin && !med && !local_pref && !communities && !next_hop;
  }

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;
};

/// Dense index of a peer in order of first appearance within one run.
struct PeerOrdinal {
  std::uint32_t value = 0;
  friend auto operator<=>(const PeerOrdinal&, const PeerOrdinal&) = default;
};

struct Route {
  Prefix dest;
  AsPath path;
  AttributeSet attrs;
  PeerOrdinal learned_from;

  bool withdrawn() const { return path.empty(); }

  /// Path or attribute difference; this is what counts as a route change.
  bool same_value(const Route& other) const {
    return path == other.path && attrs == other.attrs;
  }

  friend bool operator==(const Route&, const Route&) = default;
};

enum class UpdateKind : std::uint8_t { Announce, Withdraw };

struct UpdateRecord {
  double ts = 0;
  std::string peer;
  UpdateKind kind = UpdateKind::Announce;
  Prefix dest;
  AsPath path;
  AttributeSet attrs;

  /// Throws std::invalid_argument if a withdraw carries a path or
  /// attributes, or an announce has an empty path.
  void validate() const;

  friend bool operator==(const UpdateRecord&, const UpdateRecord&) = default;
};

class PeerRegistry {
 public:
  PeerOrdinal intern(std::string_view id);
  std::optional<PeerOrdinal> find(std::string_view id) const;
  const std::string& name(PeerOrdinal p) const { return names_.at(p.value); }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const PeerRegistry& a, const PeerRegistry& b) {
    return a.names_ == b.names_;
  }

 private:
  std::map<std::string, PeerOrdinal, std::less<>> index_;
  std::vector<std::string> names_;
};

}  // namespace pvstab
