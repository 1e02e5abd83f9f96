#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pvstab/clock.hpp"
#include "pvstab/metrics.hpp"
#include "pvstab/route.hpp"

namespace pvstab::synth {

/// Undirected AS graph with one origin and one observing collector.
///
/// The observer is a passive collector: it peers with its neighbours but
/// never provides transit, so peer paths are computed with it removed.
struct SynthTopology {
  std::vector<Asn> nodes;
  std::vector<std::pair<Asn, Asn>> edges;
  Asn origin = 0;
  Asn observer = 0;

  /// Throws std::invalid_argument if the graph is not simple, not connected,
  /// or the observer has no neighbour.
  void validate() const;

  std::vector<Asn> neighbors(Asn node) const;
  bool has_edge(Asn a, Asn b) const;

  /// Ring of `n` ASes numbered from 65001, observer 65000 linked to
  /// `observer_links` ring nodes spread around the ring, origin 65002.
  static SynthTopology ring(std::size_t n, std::size_t observer_links = 1);
  /// Complete graph on `n` ASes from 65001; origin is the last node.
  static SynthTopology full_mesh(std::size_t n, std::size_t observer_links = 1);
  /// Random connected graph: a random spanning tree plus `extra_edges`.
  static SynthTopology random(std::size_t n, std::size_t extra_edges, std::uint64_t seed,
                              std::size_t observer_links = 1);
};

struct Quiescent {};
struct Flap {
  Tick period = 1;
};
struct PathExploration {
  std::pair<Asn, Asn> failed_edge;
  Tick failure_tick = 0;
};

struct ScenarioSpec {
  std::variant<Quiescent, Flap, PathExploration> kind;
  Tick duration = 10;
  std::uint32_t mrai_secs = 30;
  double base_ts = 1243804800.0;
  /// Jitters timestamps inside their tick when set. The first record is
  /// always at base_ts so the default t0 lines up.
  std::optional<std::uint64_t> seed;

  void validate() const;
};

struct TruthEntry {
  std::string peer;
  Prefix dest;
  Phi phi = 0;
};

struct TickTruth {
  Tick tick = 0;
  std::vector<TruthEntry> entries;  // ordered by peer ASN
};

struct GroundTruth {
  double t0 = 0;
  std::uint32_t mrai_secs = 30;
  Tick duration = 0;
  std::vector<TickTruth> ticks;
  /// Path lengths announced during exploration, per affected peer id.
  std::map<std::string, std::vector<std::size_t>> explored_lengths;
  /// Affected peers that ran out of paths and withdrew.
  std::vector<std::string> withdrew;
};

struct SynthTrace {
  std::vector<UpdateRecord> records;
  GroundTruth truth;
};

std::string peer_id(Asn asn);
Prefix origin_prefix(Asn origin);

/// Shortest-first list of simple paths from `from` to the origin avoiding
/// the observer; ties ordered lexicographically by ASN.
std::vector<std::vector<Asn>> candidate_paths(const SynthTopology& topo, Asn from);

SynthTrace generate(const SynthTopology& topo, const ScenarioSpec& spec);

/// Header line with t0/mrai/duration, then one line per tick.
std::string ground_truth_ndjson(const GroundTruth& truth);

}  // namespace pvstab::synth
