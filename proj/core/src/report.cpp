#include "pvstab/report.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "text.hpp"

namespace pvstab {

using detail::format_double;

namespace {

std::string maybe(const std::optional<RelativeSummary>& r, double RelativeSummary::*field) {
  if (!r || r->n == 0) return {};
  return format_double((*r).*field);
}

std::string maybe_n(const std::optional<RelativeSummary>& r) {
  return r ? std::to_string(r->n) : std::string();
}

nlohmann::ordered_json relative_json(const std::optional<RelativeSummary>& r) {
  if (!r) return nullptr;
  nlohmann::ordered_json j;
  j["n"] = r->n;
  j["skipped"] = r->skipped;
  if (r->n) {
    j["mu"] = r->mu;
    j["sigma2"] = r->sigma2;
    j["max"] = r->max;
  }
  return j;
}

nlohmann::ordered_json histogram_json(const std::map<int, std::uint64_t>& h) {
  auto j = nlohmann::ordered_json::object();
  for (const auto& [diff, count] : h) j[std::to_string(diff)] = count;
  return j;
}

}  // namespace

const std::vector<std::string>& tick_csv_columns() {
  static const std::vector<std::string> columns = {
      "tick",           "n_routes",           "rt_delta_mu",     "rt_delta_sigma2",
      "class",          "dphi_stable_mu",     "dphi_stable_max", "dphi_stable_sigma2",
      "dphi_sel_mu",    "dphi_sel_sigma2",    "cumvar_stable",   "cumvar_sel",
      "added",          "deleted",            "changed",         "unchanged",
      // appended
      "dphi_sel_max",   "dphi_stable_n",      "dphi_sel_n",      "adj_routes",
      "updates",        "consistency_violations", "lane_mu",     "lane_sigma2",
      "lane_divergence", "stretch_lacking",   "stretch_hist",
  };
  return columns;
}

std::string tick_csv_header() {
  std::string out;
  for (const auto& c : tick_csv_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string tick_csv_row(const TickReport& r) {
  const std::vector<std::string> cells = {
      std::to_string(r.tick),
      std::to_string(r.n_routes),
      format_double(r.rt_delta.mu),
      format_double(r.rt_delta.sigma2),
      std::string(to_string(r.state)),
      maybe(r.dphi_stable, &RelativeSummary::mu),
      maybe(r.dphi_stable, &RelativeSummary::max),
      maybe(r.dphi_stable, &RelativeSummary::sigma2),
      maybe(r.dphi_selected, &RelativeSummary::mu),
      maybe(r.dphi_selected, &RelativeSummary::sigma2),
      r.dphi_stable ? format_double(r.cumvar_stable) : std::string(),
      r.dphi_selected ? format_double(r.cumvar_selected) : std::string(),
      std::to_string(r.counts.added),
      std::to_string(r.counts.deleted),
      std::to_string(r.counts.changed),
      std::to_string(r.counts.unchanged),
      maybe(r.dphi_selected, &RelativeSummary::max),
      maybe_n(r.dphi_stable),
      maybe_n(r.dphi_selected),
      std::to_string(r.adj_routes),
      std::to_string(r.updates),
      std::to_string(r.consistency_violations),
      format_double(r.lane_delta.mu),
      format_double(r.lane_delta.sigma2),
      std::to_string(r.lane_divergence),
      std::to_string(r.stretch.lacking),
      encode_histogram(r.stretch.counts),
  };
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::string tick_ndjson(const TickReport& r) {
  nlohmann::ordered_json j;
  j["tick"] = r.tick;
  j["n_routes"] = r.n_routes;
  j["adj_routes"] = r.adj_routes;
  j["updates"] = r.updates;
  j["rt_delta"] = {{"mu", r.rt_delta.mu}, {"sigma2", r.rt_delta.sigma2}, {"n", r.rt_delta.n}};
  j["class"] = std::string(to_string(r.state));
  j["dphi_stable"] = relative_json(r.dphi_stable);
  j["dphi_selected"] = relative_json(r.dphi_selected);
  j["cumvar_stable"] = r.cumvar_stable;
  j["cumvar_selected"] = r.cumvar_selected;
  j["counts"] = {{"unchanged", r.counts.unchanged},
                 {"added", r.counts.added},
                 {"deleted", r.counts.deleted},
                 {"changed", r.counts.changed}};
  j["consistency_violations"] = r.consistency_violations;
  j["lane"] = {{"mu", r.lane_delta.mu},
               {"sigma2", r.lane_delta.sigma2},
               {"divergence", r.lane_divergence}};
  j["stretch"] = {{"histogram", histogram_json(r.stretch.counts)},
                  {"lacking", r.stretch.lacking}};
  j["spurious_withdrawals"] = r.spurious_withdrawals;
  return j.dump();
}

std::string summary_json(const AnalysisSummary& s, const AnalysisConfig& cfg) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"mrai_secs", cfg.mrai_secs},
      {"alpha", cfg.alpha},
      {"beta", cfg.beta},
      {"t0", s.t0 ? nlohmann::ordered_json(*s.t0) : nlohmann::ordered_json(nullptr)},
      {"references", std::string(to_string(cfg.references))},
      {"decision_criteria", cfg.ranking.to_string()},
      {"med_policy", "compared only between routes with the same first-hop AS; "
                     "different first hops are ordered by first-hop ASN"},
      {"route_delta", cfg.route_delta_mode == RouteDeltaMode::Repaired ? "repaired" : "as_printed"},
      {"withdrawn_entries", "retained until their counter decays to zero"},
  };
  j["ticks"] = s.ticks;
  j["ingest"] = {{"records_ok", s.ingest.records_ok},
                 {"records_skipped", s.ingest.records_skipped},
                 {"out_of_order_count", s.ingest.out_of_order_count},
                 {"first_ts", s.ingest.first_ts ? nlohmann::ordered_json(*s.ingest.first_ts)
                                                : nlohmann::ordered_json(nullptr)},
                 {"last_ts", s.ingest.last_ts ? nlohmann::ordered_json(*s.ingest.last_ts)
                                              : nlohmann::ordered_json(nullptr)}};
  j["records_applied"] = s.records_applied;
  j["collapsed_records"] = s.collapsed_records;
  j["rejected_before_t0"] = s.rejected_before_t0;
  j["late_records"] = s.late_records;
  j["spurious_withdrawals"] = s.spurious_withdrawals;
  j["peers"] = s.peers;
  j["n_routes"] = s.final_n;
  j["adj_routes"] = s.final_m;
  j["rt_delta"] = {{"mean_mu", s.mean_rt_mu}, {"max_mu", s.max_rt_mu}};
  j["class_ticks"] = {{"stable", s.state_ticks[0]},
                      {"marginally_stable", s.state_ticks[1]},
                      {"unstable", s.state_ticks[2]}};
  j["cumvar_stable"] = s.cumvar_stable;
  j["cumvar_selected"] = s.cumvar_selected;
  j["consistency_violations"] = s.consistency_violations;

  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : s.final_stretch.curve()) {
    curve.push_back({{"diff", p.diff},
                     {"count", p.count},
                     {"percent", p.percent},
                     {"cumulative_percent", p.cumulative_percent},
                     {"at_least_percent", p.at_least_percent}});
  }
  j["stretch"] = {{"histogram", histogram_json(s.final_stretch.counts)},
                  {"lacking", s.final_stretch.lacking},
                  {"curve", curve}};
  j["stability_lane"] = {{"mean_mu", s.lane_mean_mu},
                         {"divergence_total", s.lane_divergence_total},
                         {"diverged_ticks", s.lane_diverged_ticks},
                         {"stretch_cost", histogram_json(s.lane_stretch_cost)}};
  return j.dump(2);
}

std::string encode_histogram(const std::map<int, std::uint64_t>& h) {
  std::string out;
  for (const auto& [diff, count] : h) {
    if (!out.empty()) out += ';';
    out += std::to_string(diff);
    out += ':';
    out += std::to_string(count);
  }
  return out;
}

std::map<int, std::uint64_t> decode_histogram(std::string_view text) {
  std::map<int, std::uint64_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(pos, end - pos);
    const auto colon = item.find(':');
    auto diff = colon == std::string_view::npos ? std::nullopt
                                                : detail::parse_number<int>(item.substr(0, colon));
    auto count = colon == std::string_view::npos
                     ? std::nullopt
                     : detail::parse_number<std::uint64_t>(item.substr(colon + 1));
    if (!diff || !count) throw ReportError("bad histogram entry '" + std::string(item) + "'");
    out[*diff] += *count;
    pos = end + 1;
  }
  return out;
}

const std::string& TickRow::cell(std::string_view column) const {
  static const std::string kEmpty;
  auto it = std::find(header_->begin(), header_->end(), column);
  if (it == header_->end()) return kEmpty;
  return cells_[static_cast<std::size_t>(it - header_->begin())];
}

std::optional<double> TickRow::number(std::string_view column) const {
  const auto& text = cell(column);
  if (text.empty()) return std::nullopt;
  auto v = detail::parse_number<double>(text);
  if (!v) throw ReportError("column " + std::string(column) + ": not a number: '" + text + "'");
  return v;
}

TickTable TickTable::read(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  TickTable t;
  std::string line;
  if (!std::getline(in, line)) throw ReportError("empty ticks file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = std::make_shared<const std::vector<std::string>>(split(line));
  t.header_ = header;
  for (const char* required : {"tick", "rt_delta_mu"}) {
    if (std::find(header->begin(), header->end(), required) == header->end()) {
      throw ReportError(std::string("ticks file lacks column '") + required + "'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header->size()) {
      throw ReportError("ticks file line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header->size()) + " cells, got " +
                        std::to_string(cells.size()));
    }
    t.rows_.emplace_back(header, std::move(cells));
  }
  return t;
}

std::optional<FigureKind> parse_figure_kind(int fig) {
  if (fig < 4 || fig > 8) return std::nullopt;
  return static_cast<FigureKind>(fig);
}

void write_figure(const TickTable& table, FigureKind kind, std::ostream& out,
                  std::optional<Tick> tick) {
  auto series = [&](std::initializer_list<const char*> columns) {
    out << "tick";
    for (const char* c : columns) out << ',' << c;
    out << '\n';
    for (const auto& row : table.rows()) {
      // Ticks without a value (no reference yet) are left out of the plot.
      bool complete = true;
      for (const char* c : columns) complete = complete && row.number(c).has_value();
      if (!complete) continue;
      out << row.cell("tick");
      for (const char* c : columns) out << ',' << row.cell(c);
      out << '\n';
    }
  };

  switch (kind) {
    case FigureKind::MostStableMeasure:
      series({"dphi_stable_mu", "dphi_stable_max"});
      return;
    case FigureKind::CumVarMostStable:
      series({"cumvar_stable"});
      return;
    case FigureKind::BestSelectedMeasure:
      series({"dphi_sel_mu", "dphi_sel_max"});
      return;
    case FigureKind::CumVarBestSelected:
      series({"cumvar_sel"});
      return;
    case FigureKind::StretchCurve:
      break;
  }

  if (std::find(table.header().begin(), table.header().end(), "stretch_hist") ==
      table.header().end()) {
    throw ReportError("ticks file lacks column 'stretch_hist'");
  }
  if (table.rows().empty()) throw ReportError("ticks file has no rows");
  const TickRow* row = &table.rows().back();
  if (tick) {
    row = nullptr;
    for (const auto& r : table.rows()) {
      if (r.cell("tick") == std::to_string(*tick)) row = &r;
    }
    if (!row) throw ReportError("tick " + std::to_string(*tick) + " not in ticks file");
  }
  StretchHistogram h;
  h.counts = decode_histogram(row->cell("stretch_hist"));
  out << "diff,count,percent,cumulative_percent,at_least_percent\n";
  for (const auto& p : h.curve()) {
    out << p.diff << ',' << p.count << ',' << format_double(p.percent) << ','
        << format_double(p.cumulative_percent) << ',' << format_double(p.at_least_percent)
        << '\n';
  }
}

}  // namespace pvstab
