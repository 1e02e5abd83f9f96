#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pvstab/pipeline.hpp"

namespace pvstab {

/// ticks.csv column order. Frozen: new columns are only ever appended.
const std::vector<std::string>& tick_csv_columns();

std::string tick_csv_header();
std::string tick_csv_row(const TickReport& r);
std::string tick_ndjson(const TickReport& r);

/// Summary document written as summary.json by `pvstab analyze`.
std::string summary_json(const AnalysisSummary& s, const AnalysisConfig& cfg);

/// Compact histogram encoding used in the stretch_hist column:
/// "diff:count;diff:count", ascending diff, empty when no destinations.
std::string encode_histogram(const std::map<int, std::uint64_t>& h);
std::map<int, std::uint64_t> decode_histogram(std::string_view text);

struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One parsed ticks.csv row, addressed by column name.
class TickRow {
 public:
  TickRow(std::shared_ptr<const std::vector<std::string>> header, std::vector<std::string> cells)
      : header_(std::move(header)), cells_(std::move(cells)) {}

  /// Empty string for an absent column or an empty cell.
  const std::string& cell(std::string_view column) const;
  /// nullopt for an empty cell; ReportError for a non-numeric one.
  std::optional<double> number(std::string_view column) const;

 private:
  std::shared_ptr<const std::vector<std::string>> header_;
  std::vector<std::string> cells_;
};

class TickTable {
 public:
  /// Throws ReportError on a missing header column or a ragged row.
  static TickTable read(std::istream& in);

  const std::vector<std::string>& header() const { return *header_; }
  const std::vector<TickRow>& rows() const { return rows_; }

 private:
  // Shared with every row so a moved table keeps valid rows.
  std::shared_ptr<const std::vector<std::string>> header_ =
      std::make_shared<const std::vector<std::string>>();
  std::vector<TickRow> rows_;
};

enum class FigureKind : std::uint8_t {
  MostStableMeasure = 4,    // tick, dphi_stable_mu, dphi_stable_max
  CumVarMostStable = 5,     // tick, cumvar_stable
  BestSelectedMeasure = 6,  // tick, dphi_sel_mu, dphi_sel_max
  CumVarBestSelected = 7,   // tick, cumvar_sel
  StretchCurve = 8,         // diff, count, percent, cumulative_percent, at_least_percent
};

std::optional<FigureKind> parse_figure_kind(int fig);

/// Writes plot-ready CSV. Stretch data comes from the row for `tick`, or the
/// last row when unset.
void write_figure(const TickTable& table, FigureKind kind, std::ostream& out,
                  std::optional<Tick> tick = std::nullopt);

}  // namespace pvstab
