#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pvstab/metrics.hpp"
#include "reference_model.hpp"

using namespace pvstab;

TEST(UpdatePhi, FollowsCounterRules) {
  EXPECT_EQ(update_phi(std::nullopt, true), 0u);
  EXPECT_EQ(update_phi(std::nullopt, false), 0u);
  EXPECT_EQ(update_phi(3u, true), 4u);
  EXPECT_EQ(update_phi(3u, false), 2u);
  EXPECT_EQ(update_phi(0u, false), 0u);
}

TEST(UpdatePhi, MatchesReflectedWalkOracleForAllShortSequences) {
  // phi(n) = S(n) - min_{k<=n} S(k) for the unfloored +1/-1 walk S.
  for (int len = 1; len <= 10; ++len) {
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      std::optional<Phi> phi;
      phi = update_phi(phi, false);
      long s = 0;
      long lo = 0;
      for (int i = 0; i < len; ++i) {
        const bool changed = (bits >> i) & 1u;
        const Phi next = update_phi(phi, changed);
        EXPECT_LE(std::abs(static_cast<long>(next) - static_cast<long>(*phi)), 1);
        phi = next;
        s += changed ? 1 : -1;
        lo = std::min(lo, s);
      }
      ASSERT_EQ(static_cast<long>(*phi), s - lo) << "len " << len << " bits " << bits;
    }
  }
}

TEST(RouteDelta, Examples) {
  EXPECT_EQ(route_delta(5, 6, true), 0.0);
  EXPECT_DOUBLE_EQ(route_delta(2, 3, false), 0.75);
  EXPECT_EQ(route_delta(1, 0, false), 0.0);
  EXPECT_EQ(route_delta(0, 0, false), 0.0);
  EXPECT_DOUBLE_EQ(route_delta(4, 3, false), 0.75);
  EXPECT_DOUBLE_EQ(route_delta(3, 3, false), 1.0);
}

TEST(RouteDelta, StaysInUnitIntervalForAllLegalPairs) {
  for (Phi t = 0; t <= 100; ++t) {
    for (Phi t1 : {t == 0 ? 0u : t - 1, t, t + 1}) {
      const double d = route_delta(t, t1, false);
      EXPECT_GE(d, 0.0) << t << "->" << t1;
      EXPECT_LE(d, 1.0) << t << "->" << t1;
    }
  }
}

TEST(RouteDelta, ContinuousChangeApproachesOneMonotonically) {
  Phi phi = 0;
  double prev = 0;
  for (Phi k = 1; k <= 200; ++k) {
    const Phi next = update_phi(phi, true);
    const double d = route_delta(phi, next, false);
    EXPECT_DOUBLE_EQ(d, static_cast<double>(k) / (k + 1));
    EXPECT_GT(d, prev);
    prev = d;
    phi = next;
  }
}

TEST(RouteDelta, QuiescentRouteReachesZeroWithinPhiTicks) {
  for (Phi start = 1; start <= 20; ++start) {
    Phi phi = start;
    Phi ticks = 0;
    double d = 1;
    while (d != 0.0) {
      const Phi next = update_phi(phi, false);
      d = route_delta(phi, next, false);
      phi = next;
      ++ticks;
    }
    EXPECT_EQ(ticks, start);
    for (int i = 0; i < 5; ++i) {
      const Phi next = update_phi(phi, false);
      EXPECT_EQ(route_delta(phi, next, false), 0.0);
      phi = next;
    }
  }
}

TEST(RouteDelta, AsPrintedModeKeepsTheOriginalElseBranch) {
  EXPECT_DOUBLE_EQ(route_delta(4, 3, false, RouteDeltaMode::AsPrinted), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(route_delta(2, 3, false, RouteDeltaMode::AsPrinted), 0.75);
  EXPECT_EQ(route_delta(0, 0, false, RouteDeltaMode::AsPrinted), 0.0);
  EXPECT_THROW(route_delta(1, 0, false, RouteDeltaMode::AsPrinted), RouteDeltaError);
}

TEST(TableDelta, Examples) {
  const std::vector<double> v = {0, 0.75, 0.25, 0};
  const auto td = table_delta(v);
  EXPECT_DOUBLE_EQ(td.mu, 0.25);
  EXPECT_DOUBLE_EQ(td.sigma2, 0.09375);
  EXPECT_EQ(td.n, 4u);

  const auto zeros = table_delta(std::vector<double>(5, 0.0));
  EXPECT_EQ(zeros.mu, 0.0);
  EXPECT_EQ(zeros.sigma2, 0.0);

  const auto single = table_delta(std::vector<double>{0.4});
  EXPECT_EQ(single.mu, 0.4);
  EXPECT_EQ(single.sigma2, 0.0);

  const auto empty = table_delta({});
  EXPECT_EQ(empty.n, 0u);
  EXPECT_EQ(empty.mu, 0.0);
  EXPECT_EQ(empty.sigma2, 0.0);
}

TEST(TableDelta, FilledMatchesMaterialisedInput) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> values(rng() % 20);
    for (auto& v : values) v = u(rng);
    const std::size_t fill_count = rng() % 50;
    const double fill = iter % 2 ? 1.0 : 0.0;
    auto full = values;
    full.insert(full.end(), fill_count, fill);

    const auto got = table_delta_filled(values, fill, fill_count);
    const auto [mu, var] = testkit::mean_variance(full);
    EXPECT_EQ(got.n, full.size());
    EXPECT_NEAR(got.mu, mu, 1e-12);
    EXPECT_NEAR(got.sigma2, var, 1e-12);
  }
}

TEST(MostStable, PicksMinimumWithLowestOrdinalOnTies) {
  const std::vector<PeerStability> a = {{PeerOrdinal{0}, 2}, {PeerOrdinal{1}, 0}, {PeerOrdinal{2}, 5}};
  EXPECT_EQ(most_stable(a)->peer.value, 1u);
  EXPECT_EQ(most_stable(a)->phi, 0u);

  const std::vector<PeerStability> tie = {{PeerOrdinal{1}, 1}, {PeerOrdinal{0}, 1}};
  EXPECT_EQ(most_stable(tie)->peer.value, 0u);

  const std::vector<PeerStability> one = {{PeerOrdinal{0}, 4}};
  EXPECT_EQ(most_stable(one)->phi, 4u);
  EXPECT_FALSE(most_stable({}));
}

TEST(RelativeStability, Examples) {
  EXPECT_EQ(relative_stability(0, 0), 1.0);
  EXPECT_EQ(relative_stability(3, 1), 2.0);
  EXPECT_EQ(relative_stability(0, 3), 0.25);
}

TEST(RelativeStability, DestinationAndAggregateExamples) {
  const std::vector<Phi> single = {0};
  EXPECT_EQ(destination_relative(single, Phi{0}), 1.0);
  const std::vector<Phi> two = {1, 3};
  EXPECT_DOUBLE_EQ(*destination_relative(two, Phi{1}), 1.5);
  EXPECT_FALSE(destination_relative(two, std::nullopt));
  EXPECT_FALSE(destination_relative({}, Phi{0}));

  const std::vector<DestinationSample> samples = {
      {Prefix::parse("10.0.0.0/8"), Phi{0}, {0}},
      {Prefix::parse("11.0.0.0/8"), Phi{0}, {1}},
      {Prefix::parse("12.0.0.0/8"), std::nullopt, {1}},
  };
  const auto rep = aggregate_relative(samples, Reference::MostStable);
  EXPECT_DOUBLE_EQ(rep.mu, 1.5);
  EXPECT_DOUBLE_EQ(rep.sigma2, 0.25);
  EXPECT_DOUBLE_EQ(rep.max, 2.0);
  EXPECT_EQ(rep.skipped, 1u);
  EXPECT_EQ(rep.per_dest.size(), 2u);
  EXPECT_EQ(rep.reference, Reference::MostStable);
}

TEST(RelativeStability, MostStableBoundHoldsForLegalSuccessors) {
  // phi_j(t+1) >= phi_j(t) - 1 >= phi_stable(t) - 1.
  for (Phi ref = 0; ref <= 50; ++ref) {
    for (Phi phi_t = ref; phi_t <= ref + 5; ++phi_t) {
      for (Phi next : {phi_t == 0 ? 0u : phi_t - 1, phi_t, phi_t + 1}) {
        EXPECT_GE(relative_stability(next, ref), static_cast<double>(ref) / (ref + 1.0));
      }
    }
  }
}

TEST(DifferentialStability, Examples) {
  EXPECT_EQ(differential_stability(4, 1).delta_phi, 3);
  EXPECT_EQ(differential_stability(4, 1).decision, SelectionDecision::Replace);
  EXPECT_EQ(differential_stability(2, 2).delta_phi, 0);
  EXPECT_EQ(differential_stability(2, 2).decision, SelectionDecision::Keep);
  EXPECT_EQ(differential_stability(1, 4).delta_phi, -3);
  EXPECT_EQ(differential_stability(1, 4).decision, SelectionDecision::Keep);
}

TEST(DifferentialStability, NeverReplacesWithALessStableRoute) {
  for (Phi cur = 0; cur < 30; ++cur) {
    for (Phi cand = 0; cand < 30; ++cand) {
      const auto d = differential_stability(cur, cand);
      EXPECT_EQ(d.delta_phi, static_cast<std::int64_t>(cur) - cand);
      if (d.decision == SelectionDecision::Replace) EXPECT_LT(cand, cur);
    }
  }
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(0.005, 0.01, 0.1), EquilibriumState::Stable);
  EXPECT_EQ(classify(0.05, 0.01, 0.1), EquilibriumState::MarginallyStable);
  EXPECT_EQ(classify(0.5, 0.01, 0.1), EquilibriumState::Unstable);
}

TEST(Classify, Boundaries) {
  const double a = 0.01;
  const double b = 0.1;
  const double eps = 1e-9;
  EXPECT_EQ(classify(a, a, b), EquilibriumState::Stable);
  EXPECT_EQ(classify(a + eps, a, b), EquilibriumState::MarginallyStable);
  EXPECT_EQ(classify(std::nextafter(a, 1.0), a, b), EquilibriumState::MarginallyStable);
  EXPECT_EQ(classify(b, a, b), EquilibriumState::MarginallyStable);
  EXPECT_EQ(classify(b + eps, a, b), EquilibriumState::Unstable);
  EXPECT_EQ(classify(std::nextafter(b, 1.0), a, b), EquilibriumState::Unstable);
  EXPECT_EQ(classify(0.0, a, b), EquilibriumState::Stable);
  EXPECT_EQ(classify(1.0, a, b), EquilibriumState::Unstable);
}

TEST(Classify, RejectsBadThresholds) {
  EXPECT_THROW(classify(0.1, 0.2, 0.1), ThresholdError);
  EXPECT_THROW(classify(0.1, 0.1, 0.1), ThresholdError);
  EXPECT_THROW(classify(0.1, 0.0, 0.1), ThresholdError);
  EXPECT_THROW(validate_thresholds(std::numeric_limits<double>::quiet_NaN(), 0.1), ThresholdError);
  try {
    validate_thresholds(0.2, 0.1);
  } catch (const ThresholdError& e) {
    EXPECT_STREQ(e.what(), "alpha must be < beta");
  }
}

TEST(CheckConsistency, Examples) {
  const std::vector<RankedPair> ok = {{0, 5, 3, 1}, {2, 3, 2, 3}};
  EXPECT_TRUE(check_consistency(ok).empty());

  const std::vector<RankedPair> bad = {{0, 1, 3, 5}};
  const auto v = check_consistency(bad, Prefix::parse("10.0.0.0/8"), 7);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].condition, ConsistencyCondition::LessPreferredMoreStable);
  EXPECT_EQ(v[0].tick, 7);
  EXPECT_EQ(v[0].dest, Prefix::parse("10.0.0.0/8"));
  EXPECT_EQ(v[0].pair.phi2, 5u);
}

TEST(CheckConsistency, ChecksBothOrientationsAndEqualRanks) {
  const std::vector<RankedPair> swapped = {{3, 5, 0, 1}};
  EXPECT_EQ(check_consistency(swapped).size(), 1u);
  const std::vector<RankedPair> swapped_ok = {{3, 1, 0, 5}};
  EXPECT_TRUE(check_consistency(swapped_ok).empty());
  const std::vector<RankedPair> equal = {{2, 3, 2, 4}};
  const auto v = check_consistency(equal);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].condition, ConsistencyCondition::EqualRankEqualStability);
}

TEST(EquilibriumState, Names) {
  EXPECT_EQ(to_string(EquilibriumState::MarginallyStable), "marginally_stable");
  EXPECT_EQ(to_string(Reference::BestSelected), "best_selected");
}
