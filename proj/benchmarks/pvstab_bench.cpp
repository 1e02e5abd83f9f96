#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "pvstab/decision.hpp"
#include "pvstab/ingest.hpp"
#include "pvstab/metrics.hpp"
#include "pvstab/pipeline.hpp"

using namespace pvstab;

namespace {

Prefix dest_of(std::size_t i) {
  return Prefix::parse("100." + std::to_string(i / 256 % 256) + "." + std::to_string(i % 256) +
                       ".0/24");
}

// Sorted synthetic trace: every (destination, peer) pair announced at t0,
// then random changes and withdrawals spread over `ticks` ticks.
std::vector<UpdateRecord> make_trace(std::size_t dests, std::size_t peers, std::size_t updates,
                                     int ticks) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> any_dest(0, dests - 1);
  std::uniform_int_distribution<std::size_t> any_peer(0, peers - 1);
  std::uniform_int_distribution<Asn> any_hop(65100, 65140);
  std::vector<UpdateRecord> out;
  auto add = [&](double ts, std::size_t d, std::size_t p, bool withdraw) {
    UpdateRecord r;
    r.ts = ts;
    r.peer = "10.1." + std::to_string(p / 256) + "." + std::to_string(p % 256);
    r.dest = dest_of(d);
    if (withdraw) {
      r.kind = UpdateKind::Withdraw;
    } else {
      r.path.hops = {64512 + static_cast<Asn>(p), any_hop(rng), 4200000000u};
    }
    out.push_back(std::move(r));
  };
  for (std::size_t d = 0; d < dests; ++d) {
    for (std::size_t p = 0; p < peers; ++p) add(0, d, p, false);
  }
  const std::size_t per_tick = updates / static_cast<std::size_t>(ticks);
  for (int k = 1; k <= ticks; ++k) {
    for (std::size_t i = 0; i < per_tick; ++i) {
      add(k * 30.0 + static_cast<double>(i) * 30.0 / per_tick, any_dest(rng), any_peer(rng),
          std::bernoulli_distribution(0.1)(rng));
    }
  }
  return out;
}

void BM_update_phi(benchmark::State& state) {
  std::vector<bool> changes(4096);
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < changes.size(); ++i) changes[i] = rng() & 1;
  for (auto _ : state) {
    Phi phi = 0;
    for (bool c : changes) phi = update_phi(phi, c);
    benchmark::DoNotOptimize(phi);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(changes.size()));
}
BENCHMARK(BM_update_phi);

void BM_select_best(benchmark::State& state) {
  std::mt19937_64 rng(5);
  CandidateSet c;
  c.dest = dest_of(0);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    Route r;
    r.dest = c.dest;
    r.learned_from = PeerOrdinal{static_cast<std::uint32_t>(i)};
    r.path.hops.assign(1 + rng() % 6, static_cast<Asn>(64500 + rng() % 8));
    if (rng() & 1) r.attrs.med = static_cast<std::uint32_t>(rng() % 4);
    c.routes.push_back(std::move(r));
  }
  const RankingFunction ranking;
  for (auto _ : state) benchmark::DoNotOptimize(select_best(c, ranking));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_select_best)->Arg(2)->Arg(8)->Arg(32);

void BM_parse_line(benchmark::State& state) {
  const std::string line = "1243804800.25|10.0.0.1|A|203.0.113.0/24|64501 64510 64999|IGP|10|100";
  for (auto _ : state) benchmark::DoNotOptimize(parse_line(line));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_parse_line);

void BM_analyzer(benchmark::State& state) {
  const auto trace = make_trace(static_cast<std::size_t>(state.range(0)), 8, 50000, 200);
  AnalysisConfig cfg;
  cfg.full_scan = state.range(1) != 0;
  for (auto _ : state) {
    Analyzer a(cfg);
    for (const auto& r : trace) a.ingest(r);
    a.finish();
    benchmark::DoNotOptimize(a.summary().mean_rt_mu);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_analyzer)
    ->Args({1000, 0})
    ->Args({1000, 1})
    ->Args({10000, 0})
    ->Unit(benchmark::kMillisecond);

void BM_run_analysis_text(benchmark::State& state) {
  std::string text;
  for (const auto& r : make_trace(2000, 5, 40000, 100)) text += format_line(r) + '\n';
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(run_analysis(TraceSource::from_stream(in), {}).ticks);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_run_analysis_text)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
