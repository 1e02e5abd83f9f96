#include "pvstab/synth.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace pvstab::synth {

namespace {

constexpr std::size_t kMaxPaths = 100000;

std::pair<Asn, Asn> norm(Asn a, Asn b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

bool uses_edge(const std::vector<Asn>& path, std::pair<Asn, Asn> e) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (norm(path[i], path[i + 1]) == norm(e.first, e.second)) return true;
  }
  return false;
}

void attach_observer(SynthTopology& t, const std::vector<Asn>& ring_nodes, std::size_t links) {
  links = std::clamp<std::size_t>(links, 1, ring_nodes.size());
  for (std::size_t i = 0; i < links; ++i) {
    t.edges.emplace_back(t.observer, ring_nodes[i * ring_nodes.size() / links]);
  }
}

}  // namespace

std::string peer_id(Asn asn) {
  return "10." + std::to_string((asn >> 16) & 0xff) + "." + std::to_string((asn >> 8) & 0xff) +
         "." + std::to_string(asn & 0xff);
}

Prefix origin_prefix(Asn origin) {
  return Prefix::parse("20." + std::to_string((origin >> 8) & 0xff) + "." +
                       std::to_string(origin & 0xff) + ".0/24");
}

std::vector<Asn> SynthTopology::neighbors(Asn node) const {
  std::vector<Asn> out;
  for (const auto& [a, b] : edges) {
    if (a == node) out.push_back(b);
    if (b == node) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SynthTopology::has_edge(Asn a, Asn b) const {
  const auto want = norm(a, b);
  return std::any_of(edges.begin(), edges.end(),
                     [&](const auto& e) { return norm(e.first, e.second) == want; });
}

void SynthTopology::validate() const {
  const std::set<Asn> node_set(nodes.begin(), nodes.end());
  if (node_set.size() != nodes.size()) throw std::invalid_argument("duplicate node");
  if (!node_set.contains(origin)) throw std::invalid_argument("origin is not a node");
  if (!node_set.contains(observer)) throw std::invalid_argument("observer is not a node");
  if (origin == observer) throw std::invalid_argument("origin and observer must differ");

  std::set<std::pair<Asn, Asn>> seen;
  for (const auto& [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self loop on " + std::to_string(a));
    if (!node_set.contains(a) || !node_set.contains(b)) {
      throw std::invalid_argument("edge references an unknown node");
    }
    if (!seen.insert(norm(a, b)).second) throw std::invalid_argument("duplicate edge");
  }
  if (neighbors(observer).empty()) throw std::invalid_argument("observer has no neighbour");

  std::set<Asn> reached{observer};
  std::vector<Asn> stack{observer};
  while (!stack.empty()) {
    const Asn n = stack.back();
    stack.pop_back();
    for (Asn m : neighbors(n)) {
      if (reached.insert(m).second) stack.push_back(m);
    }
  }
  if (reached.size() != nodes.size()) throw std::invalid_argument("topology is disconnected");
}

SynthTopology SynthTopology::ring(std::size_t n, std::size_t observer_links) {
  if (n < 3) throw std::invalid_argument("ring needs at least 3 nodes");
  SynthTopology t;
  t.observer = 65000;
  t.nodes.push_back(t.observer);
  std::vector<Asn> ring_nodes;
  for (std::size_t i = 0; i < n; ++i) ring_nodes.push_back(static_cast<Asn>(65001 + i));
  t.nodes.insert(t.nodes.end(), ring_nodes.begin(), ring_nodes.end());
  for (std::size_t i = 0; i < n; ++i) t.edges.emplace_back(ring_nodes[i], ring_nodes[(i + 1) % n]);
  t.origin = ring_nodes[1];
  attach_observer(t, ring_nodes, observer_links);
  return t;
}

SynthTopology SynthTopology::full_mesh(std::size_t n, std::size_t observer_links) {
  if (n < 2) throw std::invalid_argument("mesh needs at least 2 nodes");
  SynthTopology t;
  t.observer = 65000;
  t.nodes.push_back(t.observer);
  std::vector<Asn> mesh;
  for (std::size_t i = 0; i < n; ++i) mesh.push_back(static_cast<Asn>(65001 + i));
  t.nodes.insert(t.nodes.end(), mesh.begin(), mesh.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) t.edges.emplace_back(mesh[i], mesh[j]);
  }
  t.origin = mesh.back();
  attach_observer(t, std::vector<Asn>(mesh.begin(), mesh.end() - 1), observer_links);
  return t;
}

SynthTopology SynthTopology::random(std::size_t n, std::size_t extra_edges, std::uint64_t seed,
                                    std::size_t observer_links) {
  if (n < 2) throw std::invalid_argument("random topology needs at least 2 nodes");
  std::mt19937_64 rng(seed);
  SynthTopology t;
  t.observer = 65000;
  t.nodes.push_back(t.observer);
  std::vector<Asn> as_nodes;
  for (std::size_t i = 0; i < n; ++i) as_nodes.push_back(static_cast<Asn>(65001 + i));
  t.nodes.insert(t.nodes.end(), as_nodes.begin(), as_nodes.end());

  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    t.edges.emplace_back(as_nodes[pick(rng)], as_nodes[i]);
  }
  const std::size_t max_extra = n * (n - 1) / 2 - (n - 1);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  for (std::size_t added = 0; added < std::min(extra_edges, max_extra);) {
    const Asn a = as_nodes[any(rng)];
    const Asn b = as_nodes[any(rng)];
    if (a == b || t.has_edge(a, b)) continue;
    t.edges.emplace_back(a, b);
    ++added;
  }
  t.origin = as_nodes.back();
  attach_observer(t, std::vector<Asn>(as_nodes.begin(), as_nodes.end() - 1), observer_links);
  return t;
}

void ScenarioSpec::validate() const {
  if (duration < 1) throw std::invalid_argument("duration must be >= 1 tick");
  if (mrai_secs < 1) throw std::invalid_argument("mrai must be >= 1 second");
  if (const auto* f = std::get_if<Flap>(&kind); f && f->period < 1) {
    throw std::invalid_argument("flap period must be >= 1");
  }
  if (const auto* p = std::get_if<PathExploration>(&kind)) {
    if (p->failure_tick < 0 || p->failure_tick >= duration) {
      throw std::invalid_argument("failure tick must be in [0, duration)");
    }
  }
}

std::vector<std::vector<Asn>> candidate_paths(const SynthTopology& topo, Asn from) {
  std::vector<std::vector<Asn>> out;
  if (from == topo.observer) return out;

  std::map<Asn, std::vector<Asn>> adj;
  for (Asn n : topo.nodes) adj[n] = topo.neighbors(n);

  std::vector<Asn> path{from};
  std::set<Asn> on_path{from, topo.observer};
  std::function<void(Asn)> dfs = [&](Asn node) {
    if (out.size() >= kMaxPaths) return;
    if (node == topo.origin) {
      out.push_back(path);
      return;
    }
    for (Asn next : adj[node]) {
      if (on_path.contains(next)) continue;
      path.push_back(next);
      on_path.insert(next);
      dfs(next);
      on_path.erase(next);
      path.pop_back();
    }
  };
  dfs(from);

  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

namespace {

// nullopt = withdraw
using Event = std::optional<std::vector<Asn>>;

struct PeerPlan {
  Asn peer = 0;
  std::map<Tick, Event> events;
};

AttributeSet announce_attrs() {
  AttributeSet a;
  a.origin = Origin::Igp;
  a.med = 0;
  a.local_pref = 100;
  return a;
}

}  // namespace

SynthTrace generate(const SynthTopology& topo, const ScenarioSpec& spec) {
  topo.validate();
  spec.validate();

  SynthTrace out;
  const Prefix dest = origin_prefix(topo.origin);

  std::vector<PeerPlan> plans;
  for (Asn peer : topo.neighbors(topo.observer)) {
    PeerPlan plan{peer, {}};
    const auto paths = candidate_paths(topo, peer);
    if (!paths.empty()) plan.events[0] = paths.front();
    plans.push_back(std::move(plan));
  }

  if (const auto* flap = std::get_if<Flap>(&spec.kind)) {
    auto it = std::find_if(plans.begin(), plans.end(),
                           [](const PeerPlan& p) { return p.events.contains(0); });
    if (it != plans.end()) {
      const auto base = *it->events[0];
      auto prepended = base;
      prepended.push_back(topo.origin);
      bool toggled = false;
      for (Tick k = flap->period; k < spec.duration; k += flap->period) {
        toggled = !toggled;
        it->events[k] = toggled ? prepended : base;
      }
    }
  } else if (const auto* pe = std::get_if<PathExploration>(&spec.kind)) {
    if (!topo.has_edge(pe->failed_edge.first, pe->failed_edge.second)) {
      throw std::invalid_argument("failed edge " + std::to_string(pe->failed_edge.first) + "-" +
                                  std::to_string(pe->failed_edge.second) + " is not in the graph");
    }
    for (auto& plan : plans) {
      if (!plan.events.contains(0)) continue;
      const auto& old = *plan.events[0];
      Tick k = pe->failure_tick;
      if (norm(topo.observer, plan.peer) == norm(pe->failed_edge.first, pe->failed_edge.second)) {
        plan.events[k] = std::nullopt;  // session itself is down
        out.truth.withdrew.push_back(peer_id(plan.peer));
        continue;
      }
      if (!uses_edge(old, pe->failed_edge)) continue;

      // One announcement per distinct length, shortest first, until a path
      // that survives the failure is found.
      const auto paths = candidate_paths(topo, plan.peer);
      auto& lengths = out.truth.explored_lengths[peer_id(plan.peer)];
      bool converged = false;
      std::size_t i = 0;
      while (i < paths.size() && !converged) {
        const std::size_t len = paths[i].size();
        std::size_t j = i;
        const std::vector<Asn>* pick = nullptr;
        const std::vector<Asn>* stale = nullptr;
        for (; j < paths.size() && paths[j].size() == len; ++j) {
          if (paths[j] == old) continue;
          if (!uses_edge(paths[j], pe->failed_edge)) {
            if (!pick) pick = &paths[j];
          } else if (!stale) {
            stale = &paths[j];
          }
        }
        if (len >= old.size() && (pick || stale)) {
          plan.events[k++] = pick ? *pick : *stale;
          lengths.push_back(len);
          converged = pick != nullptr;
        }
        i = j;
      }
      if (!converged) {
        plan.events[k] = std::nullopt;
        out.truth.withdrew.push_back(peer_id(plan.peer));
      }
    }
  }

  // Records, in tick order then peer order.
  std::optional<std::mt19937_64> rng;
  if (spec.seed) rng.emplace(*spec.seed);
  std::uniform_int_distribution<std::uint32_t> jitter(0, spec.mrai_secs - 1);
  bool first = true;
  for (Tick k = 0; k < spec.duration; ++k) {
    for (const auto& plan : plans) {
      auto ev = plan.events.find(k);
      if (ev == plan.events.end()) continue;
      UpdateRecord r;
      r.ts = spec.base_ts + static_cast<double>(k) * spec.mrai_secs;
      if (rng && !first) r.ts += jitter(*rng);
      first = false;
      r.peer = peer_id(plan.peer);
      r.dest = dest;
      if (ev->second) {
        r.kind = UpdateKind::Announce;
        r.path.hops = *ev->second;
        r.attrs = announce_attrs();
      } else {
        r.kind = UpdateKind::Withdraw;
      }
      out.records.push_back(std::move(r));
    }
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const UpdateRecord& a, const UpdateRecord& b) { return a.ts < b.ts; });

  // Expected counters, tracked independently of the analysis code.
  struct Book {
    bool exists = false;
    bool withdrawn = false;
    std::vector<Asn> path;
    Phi phi = 0;
  };
  std::vector<Book> books(plans.size());
  out.truth.t0 = spec.base_ts;
  out.truth.mrai_secs = spec.mrai_secs;
  out.truth.duration = spec.duration;
  for (Tick k = 0; k < spec.duration; ++k) {
    TickTruth row{k, {}};
    for (std::size_t p = 0; p < plans.size(); ++p) {
      Book& b = books[p];
      auto ev = plans[p].events.find(k);
      if (ev != plans[p].events.end()) {
        const bool withdraw = !ev->second.has_value();
        const std::vector<Asn> path = withdraw ? std::vector<Asn>{} : *ev->second;
        if (!b.exists) {
          if (!withdraw) b = Book{true, false, path, 0};
        } else if (b.path != path || b.withdrawn != withdraw) {
          b.path = path;
          b.withdrawn = withdraw;
          ++b.phi;
        } else if (b.phi > 0) {
          --b.phi;
        }
      } else if (b.exists && b.phi > 0) {
        --b.phi;
      }
      if (b.exists && b.withdrawn && b.phi == 0) b = Book{};
      if (b.exists) row.entries.push_back({peer_id(plans[p].peer), dest, b.phi});
    }
    out.truth.ticks.push_back(std::move(row));
  }
  return out;
}

std::string ground_truth_ndjson(const GroundTruth& truth) {
  nlohmann::ordered_json meta;
  meta["kind"] = "meta";
  meta["t0"] = truth.t0;
  meta["mrai_secs"] = truth.mrai_secs;
  meta["duration"] = truth.duration;
  meta["explored_lengths"] = truth.explored_lengths;
  meta["withdrew"] = truth.withdrew;
  std::string out = meta.dump() + "\n";
  for (const auto& row : truth.ticks) {
    nlohmann::ordered_json j;
    j["kind"] = "tick";
    j["tick"] = row.tick;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : row.entries) {
      entries.push_back({{"peer", e.peer}, {"prefix", e.dest.to_string()}, {"phi", e.phi}});
    }
    j["entries"] = std::move(entries);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pvstab::synth
