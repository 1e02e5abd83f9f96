#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "pvstab/decision.hpp"
#include "reference_model.hpp"

using namespace pvstab;

namespace {

const Prefix kDest = Prefix::parse("203.0.113.0/24");

Route route(std::uint32_t peer, const std::string& path, std::optional<std::uint32_t> lp = {},
            std::optional<Origin> origin = {}, std::optional<std::uint32_t> med = {}) {
  Route r;
  r.dest = kDest;
  r.path = AsPath::parse(path);
  r.attrs.local_pref = lp;
  r.attrs.origin = origin;
  r.attrs.med = med;
  r.learned_from = PeerOrdinal{peer};
  return r;
}

std::uint32_t winner(std::vector<Route> routes) {
  auto best = select_best(CandidateSet{kDest, std::move(routes)});
  return best->learned_from.value;
}

CandidateSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<int> small(0, 3);
  CandidateSet c{kDest, {}};
  const int n = size(rng);
  std::vector<std::uint32_t> peers(16);
  std::iota(peers.begin(), peers.end(), 0u);
  std::shuffle(peers.begin(), peers.end(), rng);
  for (int i = 0; i < n; ++i) {
    Route r;
    r.dest = kDest;
    const int len = 1 + small(rng);
    for (int h = 0; h < len; ++h) r.path.hops.push_back(static_cast<Asn>(65000 + small(rng)));
    if (small(rng)) r.attrs.local_pref = static_cast<std::uint32_t>(50 * small(rng));
    if (small(rng)) r.attrs.origin = static_cast<Origin>(small(rng) % 3);
    if (small(rng)) r.attrs.med = static_cast<std::uint32_t>(small(rng));
    r.learned_from = PeerOrdinal{peers[static_cast<std::size_t>(i)]};
    c.routes.push_back(r);
  }
  return c;
}

}  // namespace

TEST(SelectBest, HighestLocalPrefWins) {
  EXPECT_EQ(winner({route(0, "1", 100), route(1, "1 2 3 4", 200)}), 1u);
}

TEST(SelectBest, AbsentLocalPrefCountsAsDefault) {
  EXPECT_EQ(winner({route(0, "1 2"), route(1, "1", 100)}), 1u);
  EXPECT_EQ(winner({route(0, "1 2"), route(1, "1", 99)}), 0u);
}

TEST(SelectBest, ShortestPathWinsOnEqualLocalPref) {
  EXPECT_EQ(winner({route(0, "1 2 3", 100), route(1, "4 5", 100)}), 1u);
}

TEST(SelectBest, LowestOriginWinsAndAbsentIsIncomplete) {
  EXPECT_EQ(winner({route(0, "1", {}, Origin::Egp), route(1, "2", {}, Origin::Igp)}), 1u);
  EXPECT_EQ(winner({route(0, "1"), route(1, "2", {}, Origin::Egp)}), 1u);
  EXPECT_EQ(winner({route(0, "1", {}, Origin::Incomplete), route(1, "2")}), 0u);
}

TEST(SelectBest, MedComparedOnlyWithinTheSameFirstHop) {
  EXPECT_EQ(winner({route(0, "7 1", {}, {}, 50), route(1, "7 2", {}, {}, 10)}), 1u);
  // Different first hops: MED does not decide; the lower first-hop ASN does.
  EXPECT_EQ(winner({route(0, "8 1", {}, {}, 10), route(1, "7 2", {}, {}, 50)}), 1u);
  // Absent MED counts as 0.
  EXPECT_EQ(winner({route(0, "7 1", {}, {}, 1), route(1, "7 2")}), 1u);
}

TEST(SelectBest, PeerOrdinalIsTheFinalTieBreak) {
  EXPECT_EQ(winner({route(1, "1 2"), route(0, "1 2")}), 0u);
}

TEST(SelectBest, EmptySetHasNoRoute) {
  EXPECT_FALSE(select_best(CandidateSet{kDest, {}}));
}

TEST(Rank, SingleCandidateGetsZero) {
  const auto r = rank(CandidateSet{kDest, {route(3, "1")}});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].first.value, 3u);
  EXPECT_EQ(r[0].second, 0u);
}

TEST(Rank, OrdinalOnlyTiesStillGetDistinctValues) {
  const auto r = rank(CandidateSet{kDest, {route(1, "1 2"), route(0, "1 2")}});
  EXPECT_EQ(r[0].second, 0u);
  EXPECT_EQ(r[1].second, 1u);
}

TEST(Rank, MatchesSortOracleOnThreeCandidates) {
  CandidateSet c{kDest, {route(0, "1 2 3"), route(1, "4", 50), route(2, "5 6")}};
  const auto r = rank(c);
  // Oracle order: peer 2 (len 2) > peer 0 (len 3) > peer 1 (local_pref 50).
  EXPECT_EQ(r[2].second, 2u);
  EXPECT_EQ(r[0].second, 1u);
  EXPECT_EQ(r[1].second, 0u);
}

TEST(Rank, RandomSetsAgreeWithIndependentOrderAndSelection) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 2000; ++iter) {
    auto c = random_set(rng);
    const auto best = select_best(c);
    const auto lambda = rank(c);

    std::vector<std::size_t> order(c.routes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = c.routes[a];
      const auto& rb = c.routes[b];
      return testkit::reference_prefers(ra.path, ra.attrs, ra.learned_from.value, rb.path,
                                        rb.attrs, rb.learned_from.value);
    });
    EXPECT_EQ(best->learned_from, c.routes[order.front()].learned_from);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      EXPECT_EQ(lambda[order[pos]].second, c.routes.size() - 1 - pos);
    }

    // Dropping a non-selected route never changes the selection.
    if (c.routes.size() > 1) {
      auto smaller = c;
      auto loser = std::find_if(smaller.routes.begin(), smaller.routes.end(),
                                [&](const Route& r) { return r.learned_from != best->learned_from; });
      smaller.routes.erase(loser);
      EXPECT_EQ(select_best(smaller)->learned_from, best->learned_from);
    }
  }
}

TEST(RankingFunction, DefaultChain) {
  EXPECT_EQ(RankingFunction().to_string(), "local_pref,as_path_len,origin,med,peer_ordinal");
}

TEST(RankingFunction, ParsesAndAppendsOrdinal) {
  EXPECT_EQ(RankingFunction::parse("as_path_len, local_pref").to_string(),
            "as_path_len,local_pref,peer_ordinal");
  EXPECT_EQ(RankingFunction::parse("").to_string(), "peer_ordinal");
  EXPECT_EQ(RankingFunction::parse("peer_ordinal,med").to_string(), "peer_ordinal");
}

TEST(RankingFunction, RejectsUnknownAndDuplicateNames) {
  EXPECT_THROW(RankingFunction::parse("igp_metric"), std::invalid_argument);
  EXPECT_THROW(RankingFunction::parse("med,med"), std::invalid_argument);
}

TEST(RankingFunction, CustomChainChangesTheWinner) {
  const std::vector<Route> routes = {route(0, "1", 50), route(1, "1 2 3", 200)};
  EXPECT_EQ(select_best(CandidateSet{kDest, routes})->learned_from.value, 1u);
  EXPECT_EQ(select_best(CandidateSet{kDest, routes}, RankingFunction::parse("as_path_len"))
                ->learned_from.value,
            0u);
}

TEST(Criterion, NamesRoundTrip) {
  for (auto c : {Criterion::LocalPref, Criterion::AsPathLength, Criterion::Origin, Criterion::Med,
                 Criterion::PeerOrdinal}) {
    EXPECT_EQ(parse_criterion(to_string(c)), c);
  }
}
