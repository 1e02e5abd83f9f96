#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "pvstab/route.hpp"

namespace pvstab {

/// Outcome of applying one update to an Adj_RIB_In.
enum class ApplyResult : std::uint8_t {
  Created,           // first sighting of (peer, dest)
  Changed,           // path or any attribute differs from the stored route
  Unchanged,         // idempotent duplicate
  SpuriousWithdraw,  // withdraw for a (peer, dest) never seen; no-op
};

inline bool is_change(ApplyResult r) { return r == ApplyResult::Changed; }

using AdjRibIn = std::map<Prefix, Route>;
using LocRib = std::map<Prefix, Route>;

/// Immutable value copy of the RIBs at one instant.
class RibSnapshot {
 public:
  RibSnapshot() = default;
  RibSnapshot(std::vector<AdjRibIn> adj_in, LocRib loc, PeerRegistry peers)
      : adj_in_(std::move(adj_in)), loc_(std::move(loc)), peers_(std::move(peers)) {}

  const std::vector<AdjRibIn>& adj_in() const { return adj_in_; }
  const LocRib& loc() const { return loc_; }
  const PeerRegistry& peers() const { return peers_; }

  std::size_t n() const { return loc_.size(); }
  std::size_t m() const;

  friend bool operator==(const RibSnapshot&, const RibSnapshot&) = default;

 private:
  std::vector<AdjRibIn> adj_in_;
  LocRib loc_;
  PeerRegistry peers_;
};

/// Per-peer Adj_RIBs_In plus the inferred Loc_RIB. Single writer.
///
/// A withdraw does not erase the Adj_RIB_In entry: the entry is kept in the
/// withdrawn state {d, empty path, empty attributes} until its owner calls
/// purge(), so a later re-announcement is a change rather than a creation.
class RibState {
 public:
  PeerOrdinal intern_peer(std::string_view id) { return peers_.intern(id); }
  const PeerRegistry& peers() const { return peers_; }

  /// Validates `u`, interns its peer and stores the new route value.
  ApplyResult apply_update(const UpdateRecord& u);
  ApplyResult apply(PeerOrdinal peer, const UpdateRecord& u);

  const Route* adj_route(PeerOrdinal peer, const Prefix& dest) const;

  /// Every Adj_RIB_In entry for `dest`, withdrawn ones included, ordered by
  /// peer ordinal.
  std::vector<const Route*> entries_for(const Prefix& dest) const;

  void purge(PeerOrdinal peer, const Prefix& dest);

  const Route* loc_route(const Prefix& dest) const;
  void set_loc(const Route& r) { loc_.insert_or_assign(r.dest, r); }
  void erase_loc(const Prefix& dest) { loc_.erase(dest); }

  const std::vector<AdjRibIn>& adj_in() const { return adj_in_; }
  const LocRib& loc() const { return loc_; }

  std::size_t n() const { return loc_.size(); }
  std::size_t m() const { return adj_entries_; }
  std::uint64_t spurious_withdrawals() const { return spurious_withdrawals_; }

  RibSnapshot snapshot() const { return RibSnapshot(adj_in_, loc_, peers_); }

 private:
  PeerRegistry peers_;
  std::vector<AdjRibIn> adj_in_;
  LocRib loc_;
  std::size_t adj_entries_ = 0;
  std::uint64_t spurious_withdrawals_ = 0;
};

}  // namespace pvstab
