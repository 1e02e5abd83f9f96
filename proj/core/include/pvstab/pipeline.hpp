#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "pvstab/clock.hpp"
#include "pvstab/decision.hpp"
#include "pvstab/ingest.hpp"
#include "pvstab/metrics.hpp"
#include "pvstab/rib.hpp"

namespace pvstab {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ReferenceSet : std::uint8_t { MostStable, BestSelected, Both };

std::optional<ReferenceSet> parse_reference_set(std::string_view name);
std::string_view to_string(ReferenceSet r);

struct AnalysisConfig {
  std::uint32_t mrai_secs = 30;
  double alpha = 0.01;
  double beta = 0.1;
  /// Start of the measurement; defaults to the first record's timestamp.
  std::optional<double> t0;
  ReferenceSet references = ReferenceSet::Both;
  RankingFunction ranking;
  RouteDeltaMode route_delta_mode = RouteDeltaMode::Repaired;
  /// Keep emitting (decaying) ticks through this index if the trace ends
  /// earlier.
  std::optional<Tick> end_tick;
  /// Stretch differences outside [min, max] are folded into the edge buckets.
  int stretch_min = -16;
  int stretch_max = 16;
  /// Re-evaluate every destination every tick instead of only the ones with
  /// non-zero counters or fresh updates. Same results, slower.
  bool full_scan = false;

  bool wants(Reference r) const {
    return references == ReferenceSet::Both ||
           (r == Reference::MostStable ? references == ReferenceSet::MostStable
                                       : references == ReferenceSet::BestSelected);
  }

  /// Throws ConfigError.
  void validate() const;
};

/// Counters of one destination after the most recent tick.
struct DestinationLedger {
  /// Non-purged Adj_RIB_In entries, ordered by peer ordinal.
  std::vector<PeerStability> peers;
  /// Loc_RIB route counter; absent when the destination is not in Loc_RIB.
  std::optional<Phi> loc;
  /// Counter of the stability-vetoed Loc_RIB lane.
  std::optional<Phi> lane;

  std::optional<Phi> phi_of(PeerOrdinal p) const;
};

using StabilityLedger = std::map<Prefix, DestinationLedger>;

/// Distribution of len(selected path) - len(most stable path) over
/// destinations. Positive: switching to the most stable route shortens the
/// path.
struct StretchHistogram {
  std::map<int, std::uint64_t> counts;
  /// Destinations with Adj_RIB_In entries but no selectable route.
  std::uint64_t lacking = 0;

  struct Point {
    int diff = 0;
    std::uint64_t count = 0;
    double percent = 0;
    double cumulative_percent = 0;  // share with difference <= diff
    double at_least_percent = 0;    // share with difference >= diff
  };

  std::uint64_t total() const;
  std::vector<Point> curve() const;
  double percent_at_least(int diff) const;

  void add(int diff) { ++counts[diff]; }
  void remove(int diff);

  friend bool operator==(const StretchHistogram&, const StretchHistogram&) = default;
};

StretchHistogram stretch_analysis(const RibState& rib, const StabilityLedger& ledger,
                                  int min_diff = -16, int max_diff = 16);
StretchHistogram stretch_analysis(const RibSnapshot& rib, const StabilityLedger& ledger,
                                  int min_diff = -16, int max_diff = 16);

/// Running sum of a per-tick variance series.
std::vector<double> cumulative_variance(std::span<const double> sigma2);

struct RelativeSummary {
  double mu = 0;
  double sigma2 = 0;
  double max = 0;
  std::size_t n = 0;
  std::size_t skipped = 0;
};

/// Route-table decomposition RT(t+1) = RT0(t) + dRT(t+1).
struct ChangeCounts {
  std::size_t unchanged = 0;
  std::size_t added = 0;
  std::size_t deleted = 0;
  std::size_t changed = 0;
};

struct TickReport {
  Tick tick = 0;
  std::size_t n_routes = 0;    // |Loc_RIB| after the tick
  std::size_t adj_routes = 0;  // Adj_RIB_In entries after purge
  std::size_t updates = 0;     // collapsed updates applied this tick
  TableDelta rt_delta;
  EquilibriumState state = EquilibriumState::Stable;
  std::optional<RelativeSummary> dphi_stable;
  std::optional<RelativeSummary> dphi_selected;
  double cumvar_stable = 0;
  double cumvar_selected = 0;
  ChangeCounts counts;
  std::uint64_t consistency_violations = 0;
  TableDelta lane_delta;
  std::size_t lane_divergence = 0;
  StretchHistogram stretch;
  std::uint64_t spurious_withdrawals = 0;
};

/// Internals of one destination's evaluation, for inspection in tests and
/// debugging. Only destinations actually evaluated in a tick are reported.
struct DestinationDetail {
  Prefix dest;
  std::optional<Phi> ref_stable_t;
  std::optional<Phi> ref_selected_t;
  /// Peers that held the destination at t, with their counters at t+1.
  std::vector<PeerStability> carried;
  std::vector<double> stable_terms;
  std::vector<double> selected_terms;
  std::optional<double> dphi_stable;
  std::optional<double> dphi_selected;
  std::optional<double> route_delta;
};

struct AnalysisSummary {
  std::size_t ticks = 0;
  std::optional<double> t0;
  std::uint64_t records_applied = 0;
  std::uint64_t collapsed_records = 0;
  std::uint64_t rejected_before_t0 = 0;
  std::uint64_t late_records = 0;
  std::uint64_t spurious_withdrawals = 0;
  std::size_t peers = 0;
  std::size_t final_n = 0;
  std::size_t final_m = 0;
  double mean_rt_mu = 0;
  double max_rt_mu = 0;
  std::array<std::size_t, 3> state_ticks{};  // indexed by EquilibriumState
  double cumvar_stable = 0;
  double cumvar_selected = 0;
  std::uint64_t consistency_violations = 0;
  std::uint64_t lane_divergence_total = 0;
  std::size_t lane_diverged_ticks = 0;
  double lane_mean_mu = 0;
  StretchHistogram final_stretch;
  /// len(stability-lane path) - len(standard path) per destination at the
  /// final tick.
  std::map<int, std::uint64_t> lane_stretch_cost;
  IngestStats ingest;
};

/// Replays an ordered update stream tick by tick.
///
/// Updates are buffered per (destination, peer) until their tick closes; the
/// last one wins. Closing a tick applies them to the Adj_RIBs_In, advances
/// every counter, re-runs selection and emits a TickReport. Ticks without
/// updates still close so counters decay.
class Analyzer {
 public:
  using TickSink = std::function<void(const TickReport&)>;
  using DetailSink = std::function<void(Tick, const DestinationDetail&)>;

  /// Throws ConfigError on an invalid configuration.
  explicit Analyzer(AnalysisConfig cfg, TickSink sink = {});

  void set_detail_sink(DetailSink sink) { detail_ = std::move(sink); }

  /// Records must arrive in non-decreasing timestamp order; older ticks are
  /// counted as late and ignored.
  void ingest(const UpdateRecord& r);
  void finish();

  const AnalysisConfig& config() const { return cfg_; }
  const std::optional<TickClock>& clock() const { return clock_; }
  const RibState& rib() const { return rib_; }
  const StabilityLedger& ledger() const { return ledger_; }
  const AnalysisSummary& summary() const { return summary_; }

 private:
  struct DestCache {
    std::optional<PeerOrdinal> selected;
    std::optional<Route> lane_route;
    std::optional<int> stretch;
    bool lacking = false;
    std::optional<int> lane_cost;
    bool divergent = false;
  };
  struct TickScratch;

  void close_through(Tick last);
  void close_tick(Tick k);
  void evaluate(const Prefix& dest, std::span<const std::pair<PeerOrdinal, ApplyResult>> touched,
                TickScratch& s);
  int clamp_stretch(int diff) const;

  AnalysisConfig cfg_;
  TickSink sink_;
  DetailSink detail_;
  std::optional<TickClock> clock_;
  Tick open_tick_ = 0;
  bool finished_ = false;

  std::map<std::pair<Prefix, PeerOrdinal>, UpdateRecord> pending_;
  RibState rib_;
  StabilityLedger ledger_;
  std::map<Prefix, DestCache> cache_;
  std::set<Prefix> hot_;

  StretchHistogram stretch_;
  std::map<int, std::uint64_t> lane_cost_;
  std::size_t divergent_ = 0;
  std::size_t lane_n_ = 0;
  double cumvar_stable_ = 0;
  double cumvar_selected_ = 0;
  double rt_mu_sum_ = 0;
  double lane_mu_sum_ = 0;
  AnalysisSummary summary_;
};

/// Streams `src` through an Analyzer. IngestError/ParseError propagate.
AnalysisSummary run_analysis(const TraceSource& src, const AnalysisConfig& cfg,
                             const Analyzer::TickSink& sink = {});

/// Standard selection against a lane where a route is only replaced by a
/// strictly more stable one.
struct ReplaySummary {
  std::uint64_t divergence_total = 0;
  std::size_t diverged_ticks = 0;
  std::vector<TableDelta> standard_series;
  std::vector<TableDelta> stability_series;
  double standard_mean_mu = 0;
  double stability_mean_mu = 0;
  std::map<int, std::uint64_t> stretch_cost;
  double mean_stretch_cost = 0;
};

ReplaySummary stability_selection_replay(const TraceSource& src, const AnalysisConfig& cfg);
ReplaySummary stability_selection_replay(std::span<const UpdateRecord> records,
                                         const AnalysisConfig& cfg);

}  // namespace pvstab
