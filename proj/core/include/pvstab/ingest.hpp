#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pvstab/route.hpp"

namespace pvstab {

/// A malformed trace line. `column` is the 1-based character offset of the
/// offending field; `line` is 0 when the error came from parse_line directly.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, std::size_t column, const std::string& reason,
             std::size_t line = 0);

  const std::string& field() const { return field_; }
  std::size_t column() const { return column_; }
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

  ParseError at_line(std::size_t line) const { return {field_, column_, reason_, line}; }

 private:
  std::string field_;
  std::size_t column_;
  std::size_t line_;
  std::string reason_;
};

/// Unreadable source, or an out-of-window record in strict mode.
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TraceFormat : std::uint8_t { CanonicalPipe, CanonicalJson };
enum class Strictness : std::uint8_t { Strict, Lenient };

std::optional<TraceFormat> parse_trace_format(std::string_view name);

/// `ts|peer|kind|prefix|as_path|origin|med|local_pref`. Trailing empty
/// fields may be omitted (a withdraw is commonly written with 7 fields).
UpdateRecord parse_line(std::string_view line);
std::string format_line(const UpdateRecord& r);

/// One JSON object per line with the pipe format's field names, plus the
/// optional `communities` and `next_hop` attributes.
UpdateRecord parse_json_line(std::string_view line);
std::string format_json_line(const UpdateRecord& r);

UpdateRecord parse_record(std::string_view line, TraceFormat format);
std::string format_record(const UpdateRecord& r, TraceFormat format);

struct IngestStats {
  std::uint64_t records_ok = 0;
  std::uint64_t records_skipped = 0;
  std::uint64_t out_of_order_count = 0;
  std::optional<double> first_ts;
  std::optional<double> last_ts;
};

struct TraceSource {
  TraceFormat format = TraceFormat::CanonicalPipe;
  std::filesystem::path path;
  std::istream* stream = nullptr;  // used instead of `path` when set
  Strictness strictness = Strictness::Lenient;
  double reorder_window_secs = 60.0;

  static TraceSource file(std::filesystem::path p, TraceFormat f = TraceFormat::CanonicalPipe,
                          Strictness s = Strictness::Lenient) {
    TraceSource src;
    src.path = std::move(p);
    src.format = f;
    src.strictness = s;
    return src;
  }
  static TraceSource from_stream(std::istream& in, TraceFormat f = TraceFormat::CanonicalPipe,
                                 Strictness s = Strictness::Lenient) {
    TraceSource src;
    src.stream = &in;
    src.format = f;
    src.strictness = s;
    return src;
  }
};

/// Pulls records from a trace in non-decreasing timestamp order.
///
/// Records up to `reorder_window_secs` behind the newest timestamp seen are
/// re-sorted; equal timestamps keep input order. Older records are counted
/// and dropped (lenient) or raise IngestError (strict). Blank lines and lines
/// starting with '#' are ignored and not counted.
class UpdateStream {
 public:
  explicit UpdateStream(const TraceSource& src);
  ~UpdateStream();
  UpdateStream(const UpdateStream&) = delete;
  UpdateStream& operator=(const UpdateStream&) = delete;

  std::optional<UpdateRecord> next();
  const IngestStats& stats() const { return stats_; }

 private:
  struct Pending {
    UpdateRecord record;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.record.ts != b.record.ts ? a.record.ts > b.record.ts : a.seq > b.seq;
    }
  };

  bool read_one();

  std::unique_ptr<std::istream> owned_;
  std::istream* in_ = nullptr;
  TraceFormat format_;
  Strictness strictness_;
  double window_;
  std::priority_queue<Pending, std::vector<Pending>, Later> buffer_;
  std::optional<double> max_ts_;
  std::uint64_t seq_ = 0;
  std::size_t line_no_ = 0;
  bool eof_ = false;
  IngestStats stats_;
};

/// Drains a source into memory.
std::vector<UpdateRecord> read_all(const TraceSource& src, IngestStats* stats = nullptr);

}  // namespace pvstab
