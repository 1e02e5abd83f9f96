#include <gtest/gtest.h>

#include <sstream>

#include "harness.hpp"
#include "json.hpp"
#include "pvstab/report.hpp"
#include "random_trace.hpp"

using namespace pvstab;

namespace {

std::string run_csv(const std::vector<UpdateRecord>& trace) {
  std::string s = tick_csv_header() + "\n";
  for (const auto& r : testkit::run_collect(trace, {}, false).reports) s += tick_csv_row(r) + "\n";
  return s;
}

TickTable table_of(const std::string& csv) {
  std::istringstream in(csv);
  return TickTable::read(in);
}

std::string figure(const TickTable& t, int fig, std::optional<Tick> tick = {}) {
  std::ostringstream out;
  write_figure(t, *parse_figure_kind(fig), out, tick);
  return out.str();
}

}  // namespace

TEST(TickCsv, LeadingColumnsAreFrozen) {
  const std::vector<std::string> leading = {
      "tick",         "n_routes",        "rt_delta_mu",     "rt_delta_sigma2",
      "class",        "dphi_stable_mu",  "dphi_stable_max", "dphi_stable_sigma2",
      "dphi_sel_mu",  "dphi_sel_sigma2", "cumvar_stable",   "cumvar_sel",
      "added",        "deleted",         "changed",         "unchanged"};
  const auto& cols = tick_csv_columns();
  ASSERT_GE(cols.size(), leading.size());
  EXPECT_TRUE(std::equal(leading.begin(), leading.end(), cols.begin()));
  EXPECT_EQ(cols.back(), "stretch_hist");
  EXPECT_EQ(tick_csv_header().substr(0, 20), "tick,n_routes,rt_del");
}

TEST(TickCsv, RowHasOneCellPerColumnAndBlanksMissingReferences) {
  TickReport r;
  r.dphi_stable = RelativeSummary{};
  r.stretch.add(0);
  r.stretch.add(2);
  const auto row = tick_csv_row(r);
  EXPECT_EQ(static_cast<std::size_t>(std::count(row.begin(), row.end(), ',')) + 1,
            tick_csv_columns().size());
  const auto t = table_of(tick_csv_header() + "\n" + row + "\n");
  ASSERT_EQ(t.rows().size(), 1u);
  EXPECT_EQ(t.rows()[0].cell("dphi_stable_mu"), "");
  EXPECT_EQ(t.rows()[0].cell("dphi_stable_n"), "0");
  EXPECT_EQ(t.rows()[0].cell("dphi_sel_n"), "");
  EXPECT_EQ(t.rows()[0].cell("class"), "stable");
  EXPECT_EQ(t.rows()[0].cell("stretch_hist"), "0:1;2:1");
}

TEST(Histogram, EncodeDecodeRoundTrip) {
  const std::map<int, std::uint64_t> h = {{-16, 3}, {-1, 1}, {0, 90}, {7, 12}};
  EXPECT_EQ(encode_histogram(h), "-16:3;-1:1;0:90;7:12");
  EXPECT_EQ(decode_histogram(encode_histogram(h)), h);
  EXPECT_TRUE(decode_histogram("").empty());
  EXPECT_THROW(decode_histogram("1:2;x"), ReportError);
  EXPECT_THROW(decode_histogram("1:-2"), ReportError);
}

TEST(TickTable, RejectsBrokenFiles) {
  std::istringstream empty("");
  EXPECT_THROW(TickTable::read(empty), ReportError);
  EXPECT_THROW(table_of("tick,foo\n1,2\n"), ReportError);
  EXPECT_THROW(table_of("tick,rt_delta_mu\n1,2,3\n"), ReportError);
  const auto t = table_of("tick,rt_delta_mu\r\n0,0.5\r\n\r\n1,x\r\n");
  ASSERT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(t.rows()[0].number("rt_delta_mu"), 0.5);
  EXPECT_THROW(t.rows()[1].number("rt_delta_mu"), ReportError);
  EXPECT_EQ(t.rows()[1].cell("absent"), "");
}

TEST(TickTable, SurvivesBeingMoved) {
  auto t = table_of("tick,rt_delta_mu\n0,0.25\n");
  std::vector<TickTable> v;
  v.push_back(std::move(t));
  v.emplace_back(table_of("tick,rt_delta_mu\n3,1\n"));
  EXPECT_EQ(v[0].rows()[0].number("rt_delta_mu"), 0.25);
  EXPECT_EQ(v[1].rows()[0].cell("tick"), "3");
}

TEST(Figures, FigureNumbers) {
  EXPECT_FALSE(parse_figure_kind(3));
  EXPECT_FALSE(parse_figure_kind(9));
  EXPECT_EQ(parse_figure_kind(8), FigureKind::StretchCurve);
}

TEST(Figures, SeriesSkipTicksWithoutAReference) {
  testkit::RandomTraceParams p;
  p.ticks = 40;
  const auto t = table_of(run_csv(testkit::random_trace(p, 3)));
  const auto f4 = figure(t, 4);
  EXPECT_EQ(f4.substr(0, f4.find('\n')), "tick,dphi_stable_mu,dphi_stable_max");
  EXPECT_EQ(f4.find("\n0,"), std::string::npos);  // tick 0 has no reference
  EXPECT_NE(f4.find("\n1,"), std::string::npos);
  EXPECT_EQ(figure(t, 6).substr(0, 29), "tick,dphi_sel_mu,dphi_sel_max");
  EXPECT_EQ(figure(t, 7).substr(0, 16), "tick,cumvar_sel\n");
}

TEST(Figures, CumulativeVarianceSeriesNeverDecreases) {
  testkit::RandomTraceParams p;
  p.ticks = 80;
  const auto t = table_of(run_csv(testkit::random_trace(p, 8)));
  for (int fig : {5, 7}) {
    std::istringstream in(figure(t, fig));
    std::string line;
    std::getline(in, line);
    double prev = 0;
    while (std::getline(in, line)) {
      const double v = std::stod(line.substr(line.find(',') + 1));
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Figures, StretchCurveWhenEverySelectionIsMostStable) {
  const auto t = table_of(tick_csv_header() + "\n" + [] {
    TickReport r;
    for (int i = 0; i < 7; ++i) r.stretch.add(0);
    return tick_csv_row(r);
  }() + "\n");
  EXPECT_EQ(figure(t, 8), "diff,count,percent,cumulative_percent,at_least_percent\n0,7,100,100,100\n");
}

TEST(Figures, StretchCurvePicksTheRequestedTick) {
  std::string csv = tick_csv_header() + "\n";
  for (int k = 0; k < 3; ++k) {
    TickReport r;
    r.tick = k;
    r.stretch.add(0);
    for (int i = 0; i < k; ++i) r.stretch.add(2);
    r.stretch.add(-1);
    csv += tick_csv_row(r) + "\n";
  }
  const auto t = table_of(csv);
  EXPECT_EQ(figure(t, 8, 0),
            "diff,count,percent,cumulative_percent,at_least_percent\n-1,1,50,50,100\n0,1,50,100,50\n");
  EXPECT_EQ(figure(t, 8), figure(t, 8, 2));
  EXPECT_THROW(figure(t, 8, 9), ReportError);
  EXPECT_THROW(figure(table_of("tick,rt_delta_mu\n0,0\n"), 8), ReportError);
  EXPECT_THROW(figure(table_of(tick_csv_header() + "\n"), 8), ReportError);
}

TEST(Ndjson, TickLineIsOneJsonObject) {
  testkit::RandomTraceParams p;
  for (const auto& r : testkit::run_collect(testkit::random_trace(p, 1), {}, false).reports) {
    const auto line = tick_ndjson(r);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["tick"], r.tick);
    EXPECT_EQ(j["n_routes"], r.n_routes);
    EXPECT_DOUBLE_EQ(j["rt_delta"]["mu"].get<double>(), r.rt_delta.mu);
  }
}

TEST(SummaryJson, RecordsConfigAndPolicies) {
  testkit::RandomTraceParams p;
  AnalysisConfig cfg;
  cfg.alpha = 0.02;
  const auto c = testkit::run_collect(testkit::random_trace(p, 2), cfg, false);
  const auto j = nlohmann::json::parse(summary_json(c.summary, cfg));
  EXPECT_EQ(j["config"]["alpha"], 0.02);
  EXPECT_EQ(j["config"]["references"], "both");
  EXPECT_EQ(j["config"]["decision_criteria"], "local_pref,as_path_len,origin,med,peer_ordinal");
  EXPECT_EQ(j["ticks"], c.summary.ticks);
  EXPECT_EQ(j["n_routes"], c.summary.final_n);
  double last = 0;
  for (const auto& point : j["stretch"]["curve"]) last = point["cumulative_percent"];
  if (c.summary.final_stretch.total()) EXPECT_DOUBLE_EQ(last, 100.0);
}
