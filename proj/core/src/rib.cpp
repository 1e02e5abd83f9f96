#include "pvstab/rib.hpp"

#include <numeric>

namespace pvstab {

std::size_t RibSnapshot::m() const {
  return std::accumulate(adj_in_.begin(), adj_in_.end(), std::size_t{0},
                         [](std::size_t acc, const AdjRibIn& t) { return acc + t.size(); });
}

ApplyResult RibState::apply_update(const UpdateRecord& u) {
  u.validate();
  return apply(peers_.intern(u.peer), u);
}

ApplyResult RibState::apply(PeerOrdinal peer, const UpdateRecord& u) {
  if (adj_in_.size() <= peer.value) adj_in_.resize(peer.value + 1);
  auto& table = adj_in_[peer.value];

  Route incoming{u.dest, {}, {}, peer};
  if (u.kind == UpdateKind::Announce) {
    incoming.path = u.path;
    incoming.attrs = u.attrs;
  }

  auto it = table.find(u.dest);
  if (it == table.end()) {
    if (u.kind == UpdateKind::Withdraw) {
      ++spurious_withdrawals_;
      return ApplyResult::SpuriousWithdraw;
    }
    table.emplace(u.dest, std::move(incoming));
    ++adj_entries_;
    return ApplyResult::Created;
  }

  if (it->second.same_value(incoming)) return ApplyResult::Unchanged;
  it->second = std::move(incoming);
  return ApplyResult::Changed;
}

const Route* RibState::adj_route(PeerOrdinal peer, const Prefix& dest) const {
  if (peer.value >= adj_in_.size()) return nullptr;
  const auto& table = adj_in_[peer.value];
  auto it = table.find(dest);
  return it == table.end() ? nullptr : &it->second;
}

std::vector<const Route*> RibState::entries_for(const Prefix& dest) const {
  std::vector<const Route*> out;
  for (const auto& table : adj_in_) {
    if (auto it = table.find(dest); it != table.end()) out.push_back(&it->second);
  }
  return out;
}

void RibState::purge(PeerOrdinal peer, const Prefix& dest) {
  if (peer.value >= adj_in_.size()) return;
  adj_entries_ -= adj_in_[peer.value].erase(dest);
}

const Route* RibState::loc_route(const Prefix& dest) const {
  auto it = loc_.find(dest);
  return it == loc_.end() ? nullptr : &it->second;
}

}  // namespace pvstab
