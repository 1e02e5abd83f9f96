#include "pvstab/pipeline.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace pvstab {

std::optional<ReferenceSet> parse_reference_set(std::string_view name) {
  if (name == "stable") return ReferenceSet::MostStable;
  if (name == "selected") return ReferenceSet::BestSelected;
  if (name == "both") return ReferenceSet::Both;
  return std::nullopt;
}

std::string_view to_string(ReferenceSet r) {
  switch (r) {
    case ReferenceSet::MostStable: return "stable";
    case ReferenceSet::BestSelected: return "selected";
    case ReferenceSet::Both: return "both";
  }
  return "?";
}

void AnalysisConfig::validate() const {
  if (mrai_secs < 1) throw ConfigError("mrai must be >= 1 second");
  try {
    validate_thresholds(alpha, beta);
  } catch (const ThresholdError& e) {
    throw ConfigError(e.what());
  }
  if (stretch_min > 0 || stretch_max < 0) {
    throw ConfigError("stretch bounds must satisfy min <= 0 <= max");
  }
  if (end_tick && *end_tick < 0) throw ConfigError("end tick must be >= 0");
}

std::optional<Phi> DestinationLedger::phi_of(PeerOrdinal p) const {
  auto it = std::lower_bound(peers.begin(), peers.end(), p,
                             [](const PeerStability& s, PeerOrdinal q) { return s.peer < q; });
  if (it == peers.end() || it->peer != p) return std::nullopt;
  return it->phi;
}

// ---------------------------------------------------------------------------
// Stretch histogram

std::uint64_t StretchHistogram::total() const {
  std::uint64_t n = 0;
  for (const auto& [diff, count] : counts) n += count;
  return n;
}

void StretchHistogram::remove(int diff) {
  auto it = counts.find(diff);
  assert(it != counts.end() && it->second > 0);
  if (--it->second == 0) counts.erase(it);
}

std::vector<StretchHistogram::Point> StretchHistogram::curve() const {
  std::vector<Point> out;
  const double n = static_cast<double>(total());
  if (n == 0) return out;
  std::uint64_t below = 0;
  for (const auto& [diff, count] : counts) {
    Point p;
    p.diff = diff;
    p.count = count;
    p.percent = 100.0 * static_cast<double>(count) / n;
    p.at_least_percent = 100.0 * static_cast<double>(total() - below) / n;
    below += count;
    p.cumulative_percent = 100.0 * static_cast<double>(below) / n;
    out.push_back(p);
  }
  return out;
}

double StretchHistogram::percent_at_least(int diff) const {
  const auto n = total();
  if (n == 0) return 0;
  std::uint64_t k = 0;
  for (auto it = counts.lower_bound(diff); it != counts.end(); ++it) k += it->second;
  return 100.0 * static_cast<double>(k) / static_cast<double>(n);
}

namespace {

template <typename Rib>
StretchHistogram stretch_walk(const Rib& rib, const StabilityLedger& ledger, int lo, int hi) {
  StretchHistogram h;
  for (const auto& [dest, led] : ledger) {
    auto loc = rib.loc().find(dest);
    if (loc == rib.loc().end()) {
      if (!led.peers.empty()) ++h.lacking;
      continue;
    }
    std::vector<PeerStability> live;
    for (const auto& ps : led.peers) {
      const auto& table = rib.adj_in()[ps.peer.value];
      auto it = table.find(dest);
      if (it != table.end() && !it->second.withdrawn()) live.push_back(ps);
    }
    auto ms = most_stable(live);
    if (!ms) {
      ++h.lacking;
      continue;
    }
    const auto& ms_route = rib.adj_in()[ms->peer.value].at(dest);
    const int diff = static_cast<int>(loc->second.path.length()) -
                     static_cast<int>(ms_route.path.length());
    h.add(std::clamp(diff, lo, hi));
  }
  return h;
}

}  // namespace

StretchHistogram stretch_analysis(const RibState& rib, const StabilityLedger& ledger,
                                  int min_diff, int max_diff) {
  return stretch_walk(rib, ledger, min_diff, max_diff);
}

StretchHistogram stretch_analysis(const RibSnapshot& rib, const StabilityLedger& ledger,
                                  int min_diff, int max_diff) {
  return stretch_walk(rib, ledger, min_diff, max_diff);
}

std::vector<double> cumulative_variance(std::span<const double> sigma2) {
  std::vector<double> out;
  out.reserve(sigma2.size());
  double acc = 0;
  for (double v : sigma2) {
    acc += v;
    out.push_back(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analyzer

struct Analyzer::TickScratch {
  TickReport report;
  std::vector<double> rt_values;
  std::vector<double> lane_values;
  std::vector<double> stable_values;
  std::vector<double> selected_values;
  double stable_max = 0;
  double selected_max = 0;
  std::size_t stable_skipped = 0;
  std::size_t selected_skipped = 0;
  std::size_t evaluated_known = 0;
  std::set<Prefix> hot_next;
};

Analyzer::Analyzer(AnalysisConfig cfg, TickSink sink) : cfg_(std::move(cfg)), sink_(std::move(sink)) {
  cfg_.validate();
}

void Analyzer::ingest(const UpdateRecord& r) {
  if (finished_) throw std::logic_error("Analyzer::ingest after finish");
  r.validate();
  if (!clock_) {
    clock_.emplace(cfg_.t0.value_or(r.ts), cfg_.mrai_secs);
    summary_.t0 = clock_->t0();
  }
  const auto k = clock_->tick_of(r.ts);
  if (!k) {
    ++summary_.rejected_before_t0;
    return;
  }
  if (*k < open_tick_) {
    ++summary_.late_records;
    return;
  }
  if (*k > open_tick_) close_through(*k - 1);

  const PeerOrdinal peer = rib_.intern_peer(r.peer);
  auto [it, inserted] = pending_.insert_or_assign({r.dest, peer}, r);
  if (!inserted) ++summary_.collapsed_records;
  ++summary_.records_applied;
}

void Analyzer::finish() {
  if (finished_) return;
  finished_ = true;
  if (!clock_) return;
  close_through(std::max(open_tick_, cfg_.end_tick.value_or(open_tick_)));

  summary_.peers = rib_.peers().size();
  summary_.final_n = rib_.n();
  summary_.final_m = rib_.m();
  summary_.final_stretch = stretch_;
  summary_.lane_stretch_cost = lane_cost_;
  summary_.spurious_withdrawals = rib_.spurious_withdrawals();
  if (summary_.ticks) {
    summary_.mean_rt_mu = rt_mu_sum_ / static_cast<double>(summary_.ticks);
    summary_.lane_mean_mu = lane_mu_sum_ / static_cast<double>(summary_.ticks);
  }
}

void Analyzer::close_through(Tick last) {
  for (Tick k = open_tick_; k <= last; ++k) close_tick(k);
  open_tick_ = last + 1;
}

int Analyzer::clamp_stretch(int diff) const {
  return std::clamp(diff, cfg_.stretch_min, cfg_.stretch_max);
}

void Analyzer::close_tick(Tick k) {
  TickScratch s;
  s.report.tick = k;

  std::map<Prefix, std::vector<std::pair<PeerOrdinal, ApplyResult>>> touched;
  for (const auto& [key, rec] : pending_) {
    const auto res = rib_.apply(key.second, rec);
    if (res == ApplyResult::SpuriousWithdraw) {
      ++s.report.spurious_withdrawals;
      continue;
    }
    ++s.report.updates;
    touched[key.first].emplace_back(key.second, res);
  }
  pending_.clear();

  std::vector<Prefix> work;
  if (cfg_.full_scan) {
    for (const auto& [dest, led] : ledger_) work.push_back(dest);
  } else {
    work.assign(hot_.begin(), hot_.end());
  }
  {
    const auto mid = work.size();
    for (const auto& [dest, list] : touched) work.push_back(dest);
    std::inplace_merge(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(mid), work.end());
    work.erase(std::unique(work.begin(), work.end()), work.end());
  }

  const std::size_t known_before = ledger_.size();
  const std::size_t n_before = rib_.n();
  static const std::vector<std::pair<PeerOrdinal, ApplyResult>> kNone;
  for (const auto& dest : work) {
    auto t = touched.find(dest);
    evaluate(dest, t == touched.end() ? kNone : t->second, s);
  }
  hot_ = std::move(s.hot_next);

  // Destinations not evaluated had every counter at zero before and after
  // this tick: route delta 0, relative stability exactly 1, no change.
  const std::size_t quiet = known_before - s.evaluated_known;
  auto& rep = s.report;
  rep.n_routes = rib_.n();
  rep.adj_routes = rib_.m();
  assert(rep.n_routes == s.rt_values.size() + quiet);
  assert(lane_n_ == s.lane_values.size() + quiet);

  rep.rt_delta = table_delta_filled(s.rt_values, 0.0, quiet);
  rep.lane_delta = table_delta_filled(s.lane_values, 0.0, quiet);
  rep.state = classify(rep.rt_delta.mu, cfg_.alpha, cfg_.beta);
  rep.counts.unchanged += quiet;
  assert(rep.counts.unchanged + rep.counts.changed + rep.counts.deleted == n_before);
  (void)n_before;

  auto relative = [quiet](const std::vector<double>& values, double max_value,
                          std::size_t skipped) {
    RelativeSummary r;
    const auto td = table_delta_filled(values, 1.0, quiet);
    r.mu = td.mu;
    r.sigma2 = td.sigma2;
    r.n = td.n;
    r.max = quiet ? std::max(max_value, 1.0) : max_value;
    r.skipped = skipped;
    return r;
  };
  if (cfg_.wants(Reference::MostStable)) {
    rep.dphi_stable = relative(s.stable_values, s.stable_max, s.stable_skipped);
    cumvar_stable_ += rep.dphi_stable->sigma2;
  }
  if (cfg_.wants(Reference::BestSelected)) {
    rep.dphi_selected = relative(s.selected_values, s.selected_max, s.selected_skipped);
    cumvar_selected_ += rep.dphi_selected->sigma2;
  }
  rep.cumvar_stable = cumvar_stable_;
  rep.cumvar_selected = cumvar_selected_;
  rep.lane_divergence = divergent_;
  rep.stretch = stretch_;

  ++summary_.ticks;
  rt_mu_sum_ += rep.rt_delta.mu;
  lane_mu_sum_ += rep.lane_delta.mu;
  summary_.max_rt_mu = std::max(summary_.max_rt_mu, rep.rt_delta.mu);
  ++summary_.state_ticks[static_cast<std::size_t>(rep.state)];
  summary_.cumvar_stable = cumvar_stable_;
  summary_.cumvar_selected = cumvar_selected_;
  summary_.consistency_violations += rep.consistency_violations;
  summary_.lane_divergence_total += divergent_;
  if (divergent_) ++summary_.lane_diverged_ticks;

  if (sink_) sink_(rep);
}

void Analyzer::evaluate(const Prefix& dest,
                        std::span<const std::pair<PeerOrdinal, ApplyResult>> touched,
                        TickScratch& s) {
  auto& rep = s.report;
  const bool known = ledger_.contains(dest);
  if (known) ++s.evaluated_known;
  DestinationLedger& led = ledger_[dest];
  DestCache& cache = cache_[dest];

  DestinationDetail detail;
  detail.dest = dest;

  // Reference counters as of the previous tick.
  if (auto ms = most_stable(led.peers)) detail.ref_stable_t = ms->phi;
  if (cache.selected) detail.ref_selected_t = led.phi_of(*cache.selected);

  const auto entries = rib_.entries_for(dest);
  std::vector<PeerStability> next;
  next.reserve(entries.size());
  std::vector<Phi> carried_phi;
  for (const Route* r : entries) {
    const PeerOrdinal peer = r->learned_from;
    ApplyResult status = ApplyResult::Unchanged;
    for (const auto& [p, res] : touched) {
      if (p == peer) status = res;
    }
    const auto prev = led.phi_of(peer);
    assert(prev.has_value() == (status != ApplyResult::Created));
    const Phi phi = update_phi(prev, is_change(status));
    next.push_back({peer, phi});
    if (prev) {
      detail.carried.push_back({peer, phi});
      carried_phi.push_back(phi);
    }
  }
  auto phi_next = [&next](PeerOrdinal p) {
    for (const auto& ps : next) {
      if (ps.peer == p) return ps.phi;
    }
    assert(false && "peer not in candidate set");
    return Phi{0};
  };

  if (cfg_.wants(Reference::MostStable)) {
    detail.dphi_stable = destination_relative(carried_phi, detail.ref_stable_t);
    if (detail.dphi_stable) {
      for (Phi phi : carried_phi) detail.stable_terms.push_back(relative_stability(phi, *detail.ref_stable_t));
      s.stable_values.push_back(*detail.dphi_stable);
      s.stable_max = std::max(s.stable_max, *detail.dphi_stable);
    } else if (!next.empty()) {
      ++s.stable_skipped;
    }
  }
  if (cfg_.wants(Reference::BestSelected)) {
    detail.dphi_selected = destination_relative(carried_phi, detail.ref_selected_t);
    if (detail.dphi_selected) {
      for (Phi phi : carried_phi) detail.selected_terms.push_back(relative_stability(phi, *detail.ref_selected_t));
      s.selected_values.push_back(*detail.dphi_selected);
      s.selected_max = std::max(s.selected_max, *detail.dphi_selected);
    } else if (!next.empty()) {
      ++s.selected_skipped;
    }
  }

  // Best-path selection over selectable routes.
  std::vector<const Route*> live;
  std::vector<Phi> live_phi;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i]->withdrawn()) {
      live.push_back(entries[i]);
      live_phi.push_back(next[i].phi);
    }
  }
  const auto best_i = best_index(live, cfg_.ranking);
  const Route* best = best_i ? live[*best_i] : nullptr;

  // Loc_RIB counter. A route entering Loc_RIB inherits its Adj_RIB_In counter.
  const Route* prev_loc = rib_.loc_route(dest);
  if (best) {
    double delta = 0;
    if (!prev_loc) {
      ++rep.counts.added;
      led.loc = phi_next(best->learned_from);
    } else {
      const bool changed =
          !(prev_loc->same_value(*best) && prev_loc->learned_from == best->learned_from);
      const Phi phi = update_phi(led.loc, changed);
      delta = route_delta(led.loc.value_or(0), phi, false, cfg_.route_delta_mode);
      led.loc = phi;
      ++(changed ? rep.counts.changed : rep.counts.unchanged);
    }
    detail.route_delta = delta;
    s.rt_values.push_back(delta);
    rib_.set_loc(*best);
    cache.selected = best->learned_from;
  } else {
    if (prev_loc) {
      ++rep.counts.deleted;
      rib_.erase_loc(dest);
    }
    led.loc.reset();
    cache.selected.reset();
  }

  // Stability lane: keep the current route unless the preferred one is
  // strictly more stable.
  const Route* lane_cur =
      cache.lane_route ? rib_.adj_route(cache.lane_route->learned_from, dest) : nullptr;
  if (lane_cur && lane_cur->withdrawn()) lane_cur = nullptr;
  const Route* lane_pick = nullptr;
  if (best) {
    if (!lane_cur || lane_cur->learned_from == best->learned_from) {
      lane_pick = best;
    } else {
      const auto ds = differential_stability(phi_next(lane_cur->learned_from),
                                             phi_next(best->learned_from));
      lane_pick = ds.decision == SelectionDecision::Replace ? best : lane_cur;
    }
  }
  if (lane_pick) {
    double delta = 0;
    if (!cache.lane_route) {
      led.lane = phi_next(lane_pick->learned_from);
      ++lane_n_;
    } else {
      const bool changed = !(cache.lane_route->same_value(*lane_pick) &&
                             cache.lane_route->learned_from == lane_pick->learned_from);
      const Phi phi = update_phi(led.lane, changed);
      delta = route_delta(led.lane.value_or(0), phi, false, cfg_.route_delta_mode);
      led.lane = phi;
    }
    s.lane_values.push_back(delta);
    cache.lane_route = *lane_pick;
  } else {
    if (cache.lane_route) --lane_n_;
    cache.lane_route.reset();
    led.lane.reset();
  }

  const bool divergent = best && lane_pick && lane_pick->learned_from != best->learned_from;
  if (divergent != cache.divergent) {
    divergent ? ++divergent_ : --divergent_;
    cache.divergent = divergent;
  }
  std::optional<int> lane_cost;
  if (best && lane_pick) {
    lane_cost = static_cast<int>(lane_pick->path.length()) - static_cast<int>(best->path.length());
  }
  if (cache.lane_cost != lane_cost) {
    if (cache.lane_cost) {
      if (--lane_cost_[*cache.lane_cost] == 0) lane_cost_.erase(*cache.lane_cost);
    }
    if (lane_cost) ++lane_cost_[*lane_cost];
    cache.lane_cost = lane_cost;
  }

  // Ranking / stability consistency between every pair of candidates.
  if (live.size() >= 2) {
    const auto lambda = rank_values(live, cfg_.ranking);
    std::vector<RankedPair> pairs;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        pairs.push_back({lambda[i], live_phi[i], lambda[j], live_phi[j]});
      }
    }
    rep.consistency_violations += check_consistency(pairs, dest, rep.tick).size();
  }

  // Withdrawn entries leave once their counter has decayed to zero.
  std::vector<PeerStability> kept;
  kept.reserve(next.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i]->withdrawn() && next[i].phi == 0) {
      rib_.purge(next[i].peer, dest);
    } else {
      kept.push_back(next[i]);
    }
  }
  led.peers = std::move(kept);

  // Stretch of the selected route against the most stable selectable one.
  std::optional<int> stretch;
  if (best) {
    std::vector<PeerStability> live_stab;
    for (std::size_t i = 0; i < live.size(); ++i) live_stab.push_back({live[i]->learned_from, live_phi[i]});
    const auto ms = most_stable(live_stab);
    const Route* ms_route = rib_.adj_route(ms->peer, dest);
    stretch = clamp_stretch(static_cast<int>(best->path.length()) -
                            static_cast<int>(ms_route->path.length()));
  }
  const bool lacking = !best && !led.peers.empty();
  if (cache.stretch != stretch) {
    if (cache.stretch) stretch_.remove(*cache.stretch);
    if (stretch) stretch_.add(*stretch);
    cache.stretch = stretch;
  }
  if (cache.lacking != lacking) {
    lacking ? ++stretch_.lacking : --stretch_.lacking;
    cache.lacking = lacking;
  }

  if (detail_) detail_(rep.tick, detail);

  if (led.peers.empty()) {
    ledger_.erase(dest);
    cache_.erase(dest);
    return;
  }
  const bool active = std::any_of(led.peers.begin(), led.peers.end(),
                                  [](const PeerStability& p) { return p.phi > 0; }) ||
                      led.loc.value_or(0) > 0 || led.lane.value_or(0) > 0;
  if (active) s.hot_next.insert(dest);
}

// ---------------------------------------------------------------------------

AnalysisSummary run_analysis(const TraceSource& src, const AnalysisConfig& cfg,
                             const Analyzer::TickSink& sink) {
  Analyzer analyzer(cfg, sink);
  UpdateStream stream(src);
  while (auto r = stream.next()) analyzer.ingest(*r);
  analyzer.finish();
  AnalysisSummary out = analyzer.summary();
  out.ingest = stream.stats();
  return out;
}

namespace {

ReplaySummary replay(const AnalysisConfig& cfg,
                     const std::function<void(Analyzer&)>& drive) {
  ReplaySummary out;
  Analyzer analyzer(cfg, [&out](const TickReport& r) {
    out.standard_series.push_back(r.rt_delta);
    out.stability_series.push_back(r.lane_delta);
  });
  drive(analyzer);
  analyzer.finish();

  const auto& sum = analyzer.summary();
  out.divergence_total = sum.lane_divergence_total;
  out.diverged_ticks = sum.lane_diverged_ticks;
  out.standard_mean_mu = sum.mean_rt_mu;
  out.stability_mean_mu = sum.lane_mean_mu;
  out.stretch_cost = sum.lane_stretch_cost;
  std::int64_t total = 0;
  std::uint64_t n = 0;
  for (const auto& [diff, count] : out.stretch_cost) {
    total += static_cast<std::int64_t>(diff) * static_cast<std::int64_t>(count);
    n += count;
  }
  if (n) out.mean_stretch_cost = static_cast<double>(total) / static_cast<double>(n);
  return out;
}

}  // namespace

ReplaySummary stability_selection_replay(const TraceSource& src, const AnalysisConfig& cfg) {
  return replay(cfg, [&src](Analyzer& a) {
    UpdateStream stream(src);
    while (auto r = stream.next()) a.ingest(*r);
  });
}

ReplaySummary stability_selection_replay(std::span<const UpdateRecord> records,
                                         const AnalysisConfig& cfg) {
  return replay(cfg, [records](Analyzer& a) {
    for (const auto& r : records) a.ingest(r);
  });
}

}  // namespace pvstab
