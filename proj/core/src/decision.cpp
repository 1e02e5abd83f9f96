#include "pvstab/decision.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pvstab {

namespace {

constexpr std::uint32_t kDefaultLocalPref = 100;

int compare(const Route& a, const Route& b, Criterion c) {
  auto cmp = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
  switch (c) {
    case Criterion::LocalPref:
      // Higher is better, so invert.
      return -cmp(a.attrs.local_pref.value_or(kDefaultLocalPref),
                  b.attrs.local_pref.value_or(kDefaultLocalPref));
    case Criterion::AsPathLength:
      return cmp(a.path.length(), b.path.length());
    case Criterion::Origin:
      return cmp(static_cast<int>(a.attrs.origin.value_or(Origin::Incomplete)),
                 static_cast<int>(b.attrs.origin.value_or(Origin::Incomplete)));
    case Criterion::Med: {
      const Asn ha = a.path.first_hop().value_or(0);
      const Asn hb = b.path.first_hop().value_or(0);
      if (ha != hb) return cmp(ha, hb);
      return cmp(a.attrs.med.value_or(0), b.attrs.med.value_or(0));
    }
    case Criterion::PeerOrdinal:
      return cmp(a.learned_from.value, b.learned_from.value);
  }
  return 0;
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::LocalPref: return "local_pref";
    case Criterion::AsPathLength: return "as_path_len";
    case Criterion::Origin: return "origin";
    case Criterion::Med: return "med";
    case Criterion::PeerOrdinal: return "peer_ordinal";
  }
  return "?";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (auto c : {Criterion::LocalPref, Criterion::AsPathLength, Criterion::Origin,
                 Criterion::Med, Criterion::PeerOrdinal}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

RankingFunction::RankingFunction()
    : RankingFunction({Criterion::LocalPref, Criterion::AsPathLength, Criterion::Origin,
                       Criterion::Med, Criterion::PeerOrdinal}) {}

RankingFunction::RankingFunction(std::vector<Criterion> chain) : chain_(std::move(chain)) {
  for (std::size_t i = 0; i < chain_.size(); ++i) {
    if (std::find(chain_.begin(), chain_.begin() + i, chain_[i]) != chain_.begin() + i) {
      throw std::invalid_argument("duplicate decision criterion '" +
                                  std::string(pvstab::to_string(chain_[i])) + "'");
    }
  }
  // Anything after the ordinal step could never decide.
  auto ord = std::find(chain_.begin(), chain_.end(), Criterion::PeerOrdinal);
  if (ord == chain_.end()) {
    chain_.push_back(Criterion::PeerOrdinal);
  } else {
    chain_.erase(ord + 1, chain_.end());
  }
}

RankingFunction RankingFunction::parse(std::string_view list) {
  std::vector<Criterion> chain;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    auto name = list.substr(pos, end - pos);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) {
      auto c = parse_criterion(name);
      if (!c) throw std::invalid_argument("unknown decision criterion '" + std::string(name) + "'");
      chain.push_back(*c);
    }
    pos = end + 1;
  }
  return RankingFunction(std::move(chain));
}

std::string RankingFunction::to_string() const {
  std::string out;
  for (auto c : chain_) {
    if (!out.empty()) out += ',';
    out += pvstab::to_string(c);
  }
  return out;
}

bool RankingFunction::prefers(const Route& a, const Route& b) const {
  for (auto c : chain_) {
    if (int r = compare(a, b, c); r != 0) return r < 0;
  }
  return false;
}

std::optional<std::size_t> best_index(std::span<const Route* const> routes,
                                      const RankingFunction& ranking) {
  if (routes.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < routes.size(); ++i) {
    if (ranking.prefers(*routes[i], *routes[best])) best = i;
  }
  return best;
}

std::optional<Route> select_best(const CandidateSet& c, const RankingFunction& ranking) {
  std::vector<const Route*> ptrs;
  ptrs.reserve(c.routes.size());
  for (const auto& r : c.routes) ptrs.push_back(&r);
  auto i = best_index(ptrs, ranking);
  if (!i) return std::nullopt;
  return c.routes[*i];
}

std::vector<std::uint32_t> rank_values(std::span<const Route* const> routes,
                                       const RankingFunction& ranking) {
  std::vector<std::size_t> order(routes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranking.prefers(*routes[a], *routes[b]);
  });
  std::vector<std::uint32_t> lambda(routes.size());
  const auto n = static_cast<std::uint32_t>(routes.size());
  for (std::uint32_t pos = 0; pos < n; ++pos) lambda[order[pos]] = n - 1 - pos;
  return lambda;
}

std::vector<std::pair<PeerOrdinal, std::uint32_t>> rank(const CandidateSet& c,
                                                         const RankingFunction& ranking) {
  std::vector<const Route*> ptrs;
  ptrs.reserve(c.routes.size());
  for (const auto& r : c.routes) ptrs.push_back(&r);
  const auto lambda = rank_values(ptrs, ranking);
  std::vector<std::pair<PeerOrdinal, std::uint32_t>> out;
  out.reserve(c.routes.size());
  for (std::size_t i = 0; i < c.routes.size(); ++i) {
    out.emplace_back(c.routes[i].learned_from, lambda[i]);
  }
  return out;
}

}  // namespace pvstab
