#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pvstab/route.hpp"

namespace pvstab {

/// One step of the best-path decision chain.
enum class Criterion : std::uint8_t {
  LocalPref,    // highest wins; absent counts as 100
  AsPathLength, // shortest wins
  Origin,       // IGP < EGP < INCOMPLETE; absent counts as INCOMPLETE
  Med,          // lowest wins, only between routes with the same first hop
  PeerOrdinal,  // lowest wins
};

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

/// Zebra-style preference order over candidate routes for one prefix.
///
/// MED is only meaningful between routes entering through the same
/// neighbouring AS. To keep the chain a strict total order, the MED step
/// compares (first hop, MED) lexicographically: routes with different first
/// hops are ordered by first-hop ASN, routes with the same first hop by MED.
/// Peer ordinal is always the final tie-break even when not listed.
class RankingFunction {
 public:
  /// local_pref, as_path_len, origin, med, peer_ordinal.
  RankingFunction();
  explicit RankingFunction(std::vector<Criterion> chain);

  /// Parses a comma-separated list of criterion names.
  static RankingFunction parse(std::string_view list);

  const std::vector<Criterion>& chain() const { return chain_; }
  std::string to_string() const;

  /// True when `a` is strictly preferred over `b`.
  bool prefers(const Route& a, const Route& b) const;

 private:
  std::vector<Criterion> chain_;
};

/// Non-withdrawn routes for one destination, at most one per peer.
struct CandidateSet {
  Prefix dest;
  std::vector<Route> routes;
};

/// Index of the preferred route in `routes`, or nullopt when empty.
std::optional<std::size_t> best_index(std::span<const Route* const> routes,
                                      const RankingFunction& ranking);

std::optional<Route> select_best(const CandidateSet& c,
                                 const RankingFunction& ranking = {});

/// Path ranking lambda: dense values, larger means preferred, so the
/// selected route holds the maximum (size - 1). Result is in input order.
std::vector<std::pair<PeerOrdinal, std::uint32_t>> rank(const CandidateSet& c,
                                                         const RankingFunction& ranking = {});
std::vector<std::uint32_t> rank_values(std::span<const Route* const> routes,
                                       const RankingFunction& ranking);

}  // namespace pvstab
