#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "pvstab/clock.hpp"
#include "pvstab/route.hpp"

namespace pvstab {

/// Stability counter value: grows by one per changed tick, decays by one per
/// quiet tick, never below zero.
using Phi = std::uint32_t;

/// Advances a counter by one tick. `prev` is nullopt when the route was
/// created during this tick.
Phi update_phi(std::optional<Phi> prev, bool changed);

/// How the decreasing-counter branch of the per-route delta is evaluated.
enum class RouteDeltaMode : std::uint8_t {
  /// phi(t+1) / phi(t): stays in [0, 1] and reaches 0 as the route settles.
  Repaired,
  /// phi(t) / phi(t+1) exactly as originally written; exceeds 1 on decay and
  /// throws RouteDeltaError when phi(t+1) is 0.
  AsPrinted,
};

struct RouteDeltaError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Per-route stability change between two successive ticks.
double route_delta(Phi phi_t, Phi phi_t1, bool is_new,
                   RouteDeltaMode mode = RouteDeltaMode::Repaired);

/// Mean and population variance of a set of per-route values.
struct TableDelta {
  double mu = 0;
  double sigma2 = 0;
  std::size_t n = 0;
};

/// Empty input is perfectly stable: mu = sigma2 = 0, n = 0.
TableDelta table_delta(std::span<const double> deltas);

/// Same statistic over `values` plus `fill_count` copies of `fill`, without
/// materialising the copies. Used for the large quiet part of a table.
TableDelta table_delta_filled(std::span<const double> values, double fill,
                              std::size_t fill_count);

struct PeerStability {
  PeerOrdinal peer;
  Phi phi = 0;
};

/// Minimal counter over the peers holding a destination; ties go to the
/// lowest peer ordinal. nullopt for an empty set.
std::optional<PeerStability> most_stable(std::span<const PeerStability> peers);

/// (phi_j(t+1) + 1) / (phi_ref(t) + 1).
double relative_stability(Phi phi_j_t1, Phi phi_ref_t);

enum class Reference : std::uint8_t { MostStable, BestSelected };

std::string_view to_string(Reference r);

/// One destination's input to the relative-stability aggregate: the
/// reference counter at t and each peer's counter at t+1.
struct DestinationSample {
  Prefix dest;
  std::optional<Phi> reference_t;
  std::vector<Phi> peer_phi_t1;
};

/// Mean of relative_stability over a destination's peers. nullopt when the
/// reference is missing or no peers remain.
std::optional<double> destination_relative(std::span<const Phi> peer_phi_t1,
                                           std::optional<Phi> reference_t);

struct RelativeStabilityReport {
  Reference reference = Reference::MostStable;
  std::map<Prefix, double> per_dest;
  double mu = 0;
  double sigma2 = 0;
  double max = 0;
  std::size_t skipped = 0;
};

RelativeStabilityReport aggregate_relative(std::span<const DestinationSample> samples,
                                           Reference reference);

enum class SelectionDecision : std::uint8_t { Keep, Replace };

struct DifferentialStability {
  std::int64_t delta_phi = 0;
  SelectionDecision decision = SelectionDecision::Keep;
};

/// delta = phi_current - phi_candidate; replace only when strictly positive.
DifferentialStability differential_stability(Phi phi_current, Phi phi_candidate);

enum class EquilibriumState : std::uint8_t { Stable, MarginallyStable, Unstable };

std::string_view to_string(EquilibriumState s);

/// Thrown for alpha/beta combinations that do not satisfy 0 < alpha < beta.
struct ThresholdError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void validate_thresholds(double alpha, double beta);

/// mu <= alpha: Stable; alpha < mu <= beta: MarginallyStable; else Unstable.
EquilibriumState classify(double mu, double alpha, double beta);

/// A pair of candidate paths to one destination with their ranking values
/// (larger = preferred) and stability counters.
struct RankedPair {
  std::uint32_t lambda1 = 0;
  Phi phi1 = 0;
  std::uint32_t lambda2 = 0;
  Phi phi2 = 0;
};

enum class ConsistencyCondition : std::uint8_t {
  LessPreferredMoreStable,  // lambda1 < lambda2 requires phi1 - phi2 >= 0
  EqualRankEqualStability,  // lambda1 == lambda2 requires phi1 == phi2
};

struct ConsistencyViolation {
  Prefix dest;
  Tick tick = 0;
  RankedPair pair;
  ConsistencyCondition condition = ConsistencyCondition::LessPreferredMoreStable;
};

/// Checks both orientations of every pair.
std::vector<ConsistencyViolation> check_consistency(std::span<const RankedPair> pairs,
                                                    const Prefix& dest = {}, Tick tick = 0);

}  // namespace pvstab
