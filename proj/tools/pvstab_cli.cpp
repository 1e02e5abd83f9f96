#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvstab/ingest.hpp"
#include "pvstab/pipeline.hpp"
#include "pvstab/report.hpp"
#include "pvstab/synth.hpp"

namespace fs = std::filesystem;
using namespace pvstab;

namespace {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kIngestError = 2,
  kAnalysisError = 3,
  kOutputError = 4,
};

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

/// Output file written to `<path>.tmp` and renamed into place on commit();
/// the temporary is removed if commit() is never reached.
class AtomicFile {
 public:
  explicit AtomicFile(fs::path target) : target_(std::move(target)), tmp_(target_) {
    tmp_ += ".tmp";
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Failure(kOutputError, "cannot write '" + tmp_.string() + "'");
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.close();
    if (!out_) throw Failure(kOutputError, "error writing '" + tmp_.string() + "'");
    std::error_code ec;
    fs::rename(tmp_, target_, ec);
    if (ec) throw Failure(kOutputError, "cannot rename into '" + target_.string() + "': " + ec.message());
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

TraceFormat format_or_fail(const std::string& name) {
  auto f = parse_trace_format(name);
  if (!f) throw Failure(kConfigError, "unknown trace format '" + name + "' (expected psv or ndjson)");
  return *f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure(kOutputError, "cannot create '" + dir.string() + "': " + ec.message());
}

void require_readable(const fs::path& p, int code) {
  std::ifstream probe(p);
  if (!probe) throw Failure(code, "cannot open '" + p.string() + "'");
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::string trace;
  std::string format = "psv";
  std::uint32_t mrai = 30;
  double alpha = 0.01;
  double beta = 0.1;
  double t0 = 0;
  std::string reference = "both";
  bool strict = false;
  std::string out = ".";
  std::string criteria;
  std::string fig2 = "repaired";
  Tick until = 0;
  double reorder_window = 60.0;
  bool ndjson = false;
  bool full_scan = false;
  int stretch_min = -16;
  int stretch_max = 16;
  std::string config;

  CLI::Option* t0_opt = nullptr;
  CLI::Option* until_opt = nullptr;
};

AnalysisConfig build_config(const AnalyzeOptions& o) {
  AnalysisConfig cfg;
  cfg.mrai_secs = o.mrai;
  cfg.alpha = o.alpha;
  cfg.beta = o.beta;
  if (o.t0_opt->count()) cfg.t0 = o.t0;
  auto refs = parse_reference_set(o.reference);
  if (!refs) throw ConfigError("unknown reference '" + o.reference + "' (expected stable, selected or both)");
  cfg.references = *refs;
  if (!o.criteria.empty()) {
    try {
      cfg.ranking = RankingFunction::parse(o.criteria);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.fig2 == "repaired") {
    cfg.route_delta_mode = RouteDeltaMode::Repaired;
  } else if (o.fig2 == "as-printed") {
    cfg.route_delta_mode = RouteDeltaMode::AsPrinted;
  } else {
    throw ConfigError("unknown --fig2 mode '" + o.fig2 + "' (expected repaired or as-printed)");
  }
  if (o.until_opt->count()) cfg.end_tick = o.until;
  cfg.stretch_min = o.stretch_min;
  cfg.stretch_max = o.stretch_max;
  cfg.full_scan = o.full_scan;
  if (!(o.reorder_window >= 0)) throw ConfigError("reorder window must be >= 0");
  cfg.validate();
  return cfg;
}

int run_analyze(const AnalyzeOptions& o) {
  AnalysisConfig cfg;
  try {
    cfg = build_config(o);
  } catch (const ConfigError& e) {
    throw Failure(kConfigError, e.what());
  }
  const TraceFormat format = format_or_fail(o.format);
  require_readable(o.trace, kIngestError);

  TraceSource src = TraceSource::file(o.trace, format, o.strict ? Strictness::Strict : Strictness::Lenient);
  src.reorder_window_secs = o.reorder_window;

  const fs::path out_dir = o.out;
  ensure_dir(out_dir);
  AtomicFile csv(out_dir / "ticks.csv");
  std::optional<AtomicFile> nd;
  if (o.ndjson) nd.emplace(out_dir / "ticks.ndjson");

  csv.stream() << tick_csv_header() << '\n';
  AnalysisSummary summary;
  try {
    summary = run_analysis(src, cfg, [&](const TickReport& r) {
      csv.stream() << tick_csv_row(r) << '\n';
      if (nd) nd->stream() << tick_ndjson(r) << '\n';
    });
  } catch (const ParseError& e) {
    throw Failure(kIngestError, o.trace + ":" + std::to_string(e.line()) + ": " + e.what());
  } catch (const IngestError& e) {
    throw Failure(kIngestError, o.trace + ": " + e.what());
  } catch (const RouteDeltaError& e) {
    throw Failure(kAnalysisError, e.what());
  }

  AtomicFile json(out_dir / "summary.json");
  json.stream() << summary_json(summary, cfg) << '\n';

  csv.commit();
  if (nd) nd->commit();
  json.commit();

  if (summary.ingest.records_skipped) {
    std::cerr << "pvstab: skipped " << summary.ingest.records_skipped << " record(s) in "
              << o.trace << '\n';
  }
  std::cout << "ticks=" << summary.ticks << " records=" << summary.records_applied
            << " peers=" << summary.peers << " n_routes=" << summary.final_n
            << " mean_mu=" << summary.mean_rt_mu << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string scenario = "quiescent";
  std::string topology = "ring";
  std::size_t nodes = 4;
  std::size_t observer_links = 1;
  std::size_t extra_edges = 2;
  std::string edges;
  Asn origin = 0;
  Asn observer = 65000;
  Tick period = 1;
  Tick ticks = 10;
  std::string fail;
  Tick fail_tick = 2;
  std::uint32_t mrai = 30;
  std::uint64_t seed = 0;
  double base_ts = 1243804800.0;
  std::string format = "psv";
  std::string out = ".";

  CLI::Option* seed_opt = nullptr;
  CLI::Option* origin_opt = nullptr;
};

std::pair<Asn, Asn> parse_edge(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("edge '" + text + "' is not A-B");
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const auto a = std::stoul(text.substr(0, dash), &used_a);
    const auto b = std::stoul(text.substr(dash + 1), &used_b);
    if (used_a != dash || used_b != text.size() - dash - 1) throw std::invalid_argument("");
    return {static_cast<Asn>(a), static_cast<Asn>(b)};
  } catch (const std::exception&) {
    throw std::invalid_argument("edge '" + text + "' is not A-B");
  }
}

synth::SynthTopology build_topology(const SimulateOptions& o) {
  if (!o.edges.empty()) {
    synth::SynthTopology t;
    std::stringstream ss(o.edges);
    std::string item;
    std::set<Asn> nodes;
    while (std::getline(ss, item, ',')) {
      auto e = parse_edge(item);
      t.edges.push_back(e);
      nodes.insert(e.first);
      nodes.insert(e.second);
    }
    t.nodes.assign(nodes.begin(), nodes.end());
    if (!o.origin_opt->count()) throw std::invalid_argument("--edges requires --origin");
    t.origin = o.origin;
    t.observer = o.observer;
    return t;
  }
  synth::SynthTopology t;
  if (o.topology == "ring") {
    t = synth::SynthTopology::ring(o.nodes, o.observer_links);
  } else if (o.topology == "mesh") {
    t = synth::SynthTopology::full_mesh(o.nodes, o.observer_links);
  } else if (o.topology == "random") {
    t = synth::SynthTopology::random(o.nodes, o.extra_edges, o.seed, o.observer_links);
  } else {
    throw std::invalid_argument("unknown topology '" + o.topology + "' (expected ring, mesh or random)");
  }
  if (o.origin_opt->count()) t.origin = o.origin;
  return t;
}

int run_simulate(const SimulateOptions& o) {
  synth::SynthTopology topo;
  synth::ScenarioSpec spec;
  try {
    topo = build_topology(o);
    topo.validate();
    spec.duration = o.ticks;
    spec.mrai_secs = o.mrai;
    spec.base_ts = o.base_ts;
    if (o.seed_opt->count()) spec.seed = o.seed;
    if (o.scenario == "quiescent") {
      spec.kind = synth::Quiescent{};
    } else if (o.scenario == "flap") {
      spec.kind = synth::Flap{o.period};
    } else if (o.scenario == "explore") {
      synth::PathExploration pe;
      pe.failure_tick = o.fail_tick;
      if (!o.fail.empty()) {
        pe.failed_edge = parse_edge(o.fail);
      } else {
        // Default: the first link of the lowest peer's best path.
        const auto peers = topo.neighbors(topo.observer);
        const auto paths = synth::candidate_paths(topo, peers.front());
        if (paths.empty() || paths.front().size() < 2) {
          throw std::invalid_argument("no default edge to fail; pass --fail A-B");
        }
        pe.failed_edge = {paths.front()[0], paths.front()[1]};
      }
      spec.kind = pe;
    } else {
      throw std::invalid_argument("unknown scenario '" + o.scenario + "' (expected quiescent, flap or explore)");
    }
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw Failure(kConfigError, e.what());
  }
  const TraceFormat format = format_or_fail(o.format);

  synth::SynthTrace trace;
  try {
    trace = synth::generate(topo, spec);
  } catch (const std::invalid_argument& e) {
    throw Failure(kConfigError, e.what());
  }

  const fs::path out_dir = o.out;
  ensure_dir(out_dir);
  AtomicFile tf(out_dir / (format == TraceFormat::CanonicalPipe ? "trace.psv" : "trace.ndjson"));
  for (const auto& r : trace.records) tf.stream() << format_record(r, format) << '\n';
  AtomicFile gt(out_dir / "truth.ndjson");
  gt.stream() << synth::ground_truth_ndjson(trace.truth);
  tf.commit();
  gt.commit();
  std::cout << "records=" << trace.records.size() << " ticks=" << spec.duration << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string in;
  int fig = 4;
  Tick tick = 0;
  std::string out;
  CLI::Option* tick_opt = nullptr;
};

int run_report(const ReportOptions& o) {
  auto kind = parse_figure_kind(o.fig);
  if (!kind) throw Failure(kConfigError, "unknown figure " + std::to_string(o.fig) + " (expected 4-8)");
  std::ifstream in(o.in);
  if (!in) throw Failure(kIngestError, "cannot open '" + o.in + "'");

  std::ostringstream body;
  try {
    const auto table = TickTable::read(in);
    std::optional<Tick> tick;
    if (o.tick_opt->count()) tick = o.tick;
    write_figure(table, *kind, body, tick);
  } catch (const ReportError& e) {
    throw Failure(kIngestError, o.in + ": " + e.what());
  }

  if (o.out.empty()) {
    std::cout << body.str();
  } else {
    AtomicFile f(o.out);
    f.stream() << body.str();
    f.commit();
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertOptions {
  std::string in;
  std::string from = "psv";
  std::string to = "ndjson";
  std::string out;
  bool strict = false;
};

int run_convert(const ConvertOptions& o) {
  const TraceFormat from = format_or_fail(o.from);
  const TraceFormat to = format_or_fail(o.to);
  std::ifstream in(o.in);
  if (!in) throw Failure(kIngestError, "cannot open '" + o.in + "'");

  std::ostringstream body;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      body << format_record(parse_record(line, from), to) << '\n';
    } catch (const ParseError& e) {
      if (o.strict) throw Failure(kIngestError, o.in + ":" + std::to_string(line_no) + ": " + e.what());
      ++skipped;
    }
  }
  if (skipped) std::cerr << "pvstab: skipped " << skipped << " malformed line(s)\n";

  if (o.out.empty()) {
    std::cout << body.str();
  } else {
    AtomicFile f(o.out);
    f.stream() << body.str();
    f.commit();
  }
  return kOk;
}

std::string columns_help() {
  std::string s = "ticks.csv columns (append-only):\n  ";
  std::size_t width = 2;
  for (const auto& c : tick_csv_columns()) {
    if (width + c.size() > 78) {
      s += "\n  ";
      width = 2;
    }
    s += c + ' ';
    width += c.size() + 1;
  }
  return s;
}

/// Argument parser plus the option values it binds to.
struct Cli {
  CLI::App app{"Routing stability analysis of path-vector update traces", "pvstab"};
  AnalyzeOptions ao;
  SimulateOptions so;
  ReportOptions ro;
  ConvertOptions co;
  CLI::App* analyze = nullptr;
  CLI::App* simulate = nullptr;
  CLI::App* report = nullptr;
  CLI::App* convert = nullptr;

  Cli() {
    app.set_version_flag("--version", "pvstab 0.1.0");
    app.require_subcommand(1);

    analyze = app.add_subcommand("analyze", "Replay a trace and write ticks.csv and summary.json");
    analyze->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    analyze->add_option("--config", ao.config, "key=value file mirroring these flags; flags take precedence");
    analyze->add_option("--trace", ao.trace, "Update trace")->required();
    analyze->add_option("--format", ao.format, "Trace format: psv or ndjson")->capture_default_str();
    analyze->add_option("--mrai", ao.mrai, "Tick length in seconds")->capture_default_str();
    analyze->add_option("--alpha", ao.alpha, "Stable threshold on mean route delta")->capture_default_str();
    analyze->add_option("--beta", ao.beta, "Unstable threshold on mean route delta")->capture_default_str();
    ao.t0_opt = analyze->add_option("--t0", ao.t0, "Measurement start (default: first record)");
    analyze->add_option("--reference", ao.reference, "stable, selected or both")->capture_default_str();
    analyze->add_flag("--strict", ao.strict, "Abort on the first malformed or out-of-window record");
    analyze->add_option("--out", ao.out, "Output directory")->capture_default_str();
    analyze->add_option("--criteria", ao.criteria,
                        "Decision chain, e.g. local_pref,as_path_len,origin,med");
    analyze->add_option("--fig2", ao.fig2, "Route delta mode: repaired or as-printed")->capture_default_str();
    ao.until_opt = analyze->add_option("--until", ao.until, "Emit decaying ticks through this tick index");
    analyze->add_option("--reorder-window", ao.reorder_window, "Seconds of out-of-order input to re-sort")
        ->capture_default_str();
    analyze->add_flag("--ndjson", ao.ndjson, "Also write ticks.ndjson");
    analyze->add_flag("--full-scan", ao.full_scan, "Evaluate every destination every tick");
    analyze->add_option("--stretch-min", ao.stretch_min, "Lowest stretch bucket")->capture_default_str();
    analyze->add_option("--stretch-max", ao.stretch_max, "Highest stretch bucket")->capture_default_str();
    analyze->footer(columns_help());

      simulate = app.add_subcommand("simulate", "Generate a synthetic trace and its ground truth");
    simulate->add_option("--scenario", so.scenario, "quiescent, flap or explore")->capture_default_str();
    simulate->add_option("--topology", so.topology, "ring, mesh or random")->capture_default_str();
    simulate->add_option("--nodes", so.nodes, "Number of ASes (observer excluded)")->capture_default_str();
    simulate->add_option("--observer-links", so.observer_links, "Observer sessions")->capture_default_str();
    simulate->add_option("--extra-edges", so.extra_edges, "Random topology: edges beyond a tree")
        ->capture_default_str();
    simulate->add_option("--edges", so.edges, "Explicit topology, e.g. 65000-65001,65001-65002");
    so.origin_opt = simulate->add_option("--origin", so.origin, "Origin AS");
    simulate->add_option("--observer", so.observer, "Observer AS for --edges")->capture_default_str();
    simulate->add_option("--period", so.period, "Flap period in ticks")->capture_default_str();
    simulate->add_option("--ticks", so.ticks, "Duration in ticks")->capture_default_str();
    simulate->add_option("--fail", so.fail, "Edge to fail, A-B (default: first link of the first peer)");
    simulate->add_option("--fail-tick", so.fail_tick, "Failure tick")->capture_default_str();
    simulate->add_option("--mrai", so.mrai, "Tick length in seconds")->capture_default_str();
    so.seed_opt = simulate->add_option("--seed", so.seed, "Seed for timestamp jitter and random topologies");
    simulate->add_option("--base-ts", so.base_ts, "Timestamp of tick 0")->capture_default_str();
    simulate->add_option("--format", so.format, "Trace format: psv or ndjson")->capture_default_str();
    simulate->add_option("--out", so.out, "Output directory")->capture_default_str();

      report = app.add_subcommand("report", "Turn ticks.csv into plot data");
    report->add_option("--in", ro.in, "ticks.csv from analyze")->required();
    report->add_option("--fig", ro.fig, "4, 5, 6, 7 or 8")->capture_default_str();
    ro.tick_opt = report->add_option("--tick", ro.tick, "Tick for --fig 8 (default: last)");
    report->add_option("--out", ro.out, "Output file (default: stdout)");

      convert = app.add_subcommand("convert", "Convert a trace between psv and ndjson");
    convert->add_option("--in", co.in, "Input trace")->required();
    convert->add_option("--from", co.from, "Input format")->capture_default_str();
    convert->add_option("--to", co.to, "Output format")->capture_default_str();
    convert->add_option("--out", co.out, "Output file (default: stdout)");
    convert->add_flag("--strict", co.strict, "Abort on the first malformed line");
  }

  void parse(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  }
};

/// The analyze --config argument, if any.
std::optional<std::string> analyze_config_file(const std::vector<std::string>& args) {
  auto sub = std::find(args.begin(), args.end(), "analyze");
  if (sub == args.end()) return std::nullopt;
  for (auto it = sub + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) return *(it + 1);
    if (it->rfind("--config=", 0) == 0) return it->substr(9);
  }
  return std::nullopt;
}

/// Rewrites `args` so the items of the analyze --config file come first and
/// the explicit flags after them, which makes the flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::string& file) {
  std::vector<std::string> out;
  std::vector<std::string> rest;
  bool seen_sub = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (!seen_sub) {
      out.push_back(a);
      seen_sub = a == "analyze";
      continue;
    }
    if (a == "--config") {
      ++i;
      continue;
    }
    if (a.rfind("--config=", 0) == 0) continue;
    rest.push_back(a);
  }
  for (const auto& item : CLI::ConfigINI().from_file(file)) {
    if (item.inputs.empty()) {
      out.push_back("--" + item.name);
    }
    for (const auto& v : item.inputs) out.push_back("--" + item.name + "=" + v);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto cli = std::make_unique<Cli>();
  try {
    if (auto file = analyze_config_file(args)) args = expand_config(args, *file);
    cli->parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = cli->app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*cli->analyze) return run_analyze(cli->ao);
    if (*cli->simulate) return run_simulate(cli->so);
    if (*cli->report) return run_report(cli->ro);
    if (*cli->convert) return run_convert(cli->co);
  } catch (const Failure& f) {
    std::cerr << "pvstab: " << f.what() << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "pvstab: " << e.what() << '\n';
    return kAnalysisError;
  }
  return kOk;
}
