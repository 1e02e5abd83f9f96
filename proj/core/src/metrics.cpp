#include "pvstab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pvstab {

Phi update_phi(std::optional<Phi> prev, bool changed) {
  if (!prev) return 0;
  if (changed) return *prev + 1;
  return *prev == 0 ? 0 : *prev - 1;
}

double route_delta(Phi phi_t, Phi phi_t1, bool is_new, RouteDeltaMode mode) {
  if (is_new) return 0.0;
  if (phi_t == 0 && phi_t1 == 0) return 0.0;
  if (phi_t1 > phi_t) {
    return static_cast<double>(phi_t + 1) / static_cast<double>(phi_t1 + 1);
  }
  if (mode == RouteDeltaMode::AsPrinted) {
    if (phi_t1 == 0) {
      throw RouteDeltaError("route delta division by zero: phi(t)=" + std::to_string(phi_t) +
                            ", phi(t+1)=0");
    }
    return static_cast<double>(phi_t) / static_cast<double>(phi_t1);
  }
  // Only reached with phi_t >= 1.
  return static_cast<double>(phi_t1) / static_cast<double>(phi_t);
}

TableDelta table_delta(std::span<const double> deltas) {
  return table_delta_filled(deltas, 0.0, 0);
}

TableDelta table_delta_filled(std::span<const double> values, double fill,
                              std::size_t fill_count) {
  TableDelta out;
  out.n = values.size() + fill_count;
  if (out.n == 0) return out;

  double sum = static_cast<double>(fill_count) * fill;
  for (double v : values) sum += v;
  out.mu = sum / static_cast<double>(out.n);

  double ss = static_cast<double>(fill_count) * (fill - out.mu) * (fill - out.mu);
  for (double v : values) ss += (v - out.mu) * (v - out.mu);
  out.sigma2 = ss / static_cast<double>(out.n);
  return out;
}

std::optional<PeerStability> most_stable(std::span<const PeerStability> peers) {
  if (peers.empty()) return std::nullopt;
  auto best = peers.begin();
  for (auto it = peers.begin() + 1; it != peers.end(); ++it) {
    if (it->phi < best->phi || (it->phi == best->phi && it->peer < best->peer)) best = it;
  }
  return *best;
}

double relative_stability(Phi phi_j_t1, Phi phi_ref_t) {
  return (static_cast<double>(phi_j_t1) + 1.0) / (static_cast<double>(phi_ref_t) + 1.0);
}

std::string_view to_string(Reference r) {
  return r == Reference::MostStable ? "most_stable" : "best_selected";
}

std::optional<double> destination_relative(std::span<const Phi> peer_phi_t1,
                                           std::optional<Phi> reference_t) {
  if (!reference_t || peer_phi_t1.empty()) return std::nullopt;
  double sum = 0;
  for (Phi phi : peer_phi_t1) sum += relative_stability(phi, *reference_t);
  return sum / static_cast<double>(peer_phi_t1.size());
}

RelativeStabilityReport aggregate_relative(std::span<const DestinationSample> samples,
                                           Reference reference) {
  RelativeStabilityReport out;
  out.reference = reference;
  std::vector<double> values;
  for (const auto& s : samples) {
    auto v = destination_relative(s.peer_phi_t1, s.reference_t);
    if (!v) {
      ++out.skipped;
      continue;
    }
    out.per_dest.emplace(s.dest, *v);
    values.push_back(*v);
    out.max = std::max(out.max, *v);
  }
  const auto td = table_delta(values);
  out.mu = td.mu;
  out.sigma2 = td.sigma2;
  return out;
}

DifferentialStability differential_stability(Phi phi_current, Phi phi_candidate) {
  DifferentialStability out;
  out.delta_phi = static_cast<std::int64_t>(phi_current) - static_cast<std::int64_t>(phi_candidate);
  out.decision = out.delta_phi > 0 ? SelectionDecision::Replace : SelectionDecision::Keep;
  return out;
}

std::string_view to_string(EquilibriumState s) {
  switch (s) {
    case EquilibriumState::Stable: return "stable";
    case EquilibriumState::MarginallyStable: return "marginally_stable";
    case EquilibriumState::Unstable: return "unstable";
  }
  return "?";
}

void validate_thresholds(double alpha, double beta) {
  if (!(alpha > 0)) throw ThresholdError("alpha must be > 0");
  if (!(alpha < beta)) throw ThresholdError("alpha must be < beta");
}

EquilibriumState classify(double mu, double alpha, double beta) {
  validate_thresholds(alpha, beta);
  if (mu <= alpha) return EquilibriumState::Stable;
  if (mu <= beta) return EquilibriumState::MarginallyStable;
  return EquilibriumState::Unstable;
}

std::vector<ConsistencyViolation> check_consistency(std::span<const RankedPair> pairs,
                                                    const Prefix& dest, Tick tick) {
  std::vector<ConsistencyViolation> out;
  for (const auto& p : pairs) {
    const auto delta = static_cast<std::int64_t>(p.phi1) - static_cast<std::int64_t>(p.phi2);
    if (p.lambda1 < p.lambda2 && delta < 0) {
      out.push_back({dest, tick, p, ConsistencyCondition::LessPreferredMoreStable});
    } else if (p.lambda1 > p.lambda2 && delta > 0) {
      // Same condition with the roles of the two paths swapped.
      out.push_back({dest, tick, p, ConsistencyCondition::LessPreferredMoreStable});
    } else if (p.lambda1 == p.lambda2 && delta != 0) {
      out.push_back({dest, tick, p, ConsistencyCondition::EqualRankEqualStability});
    }
  }
  return out;
}

}  // namespace pvstab
