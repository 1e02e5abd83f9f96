#include "pvstab/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <utility>

#include "json.hpp"
#include "text.hpp"

namespace pvstab {

using detail::format_double;
using detail::parse_number;

namespace {

constexpr std::size_t kFieldCount = 8;
constexpr const char* kFieldNames[kFieldCount] = {"ts",     "peer",   "kind", "prefix",
                                                  "as_path", "origin", "med",  "local_pref"};

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

ParseError::ParseError(std::string field, std::size_t column, const std::string& reason,
                       std::size_t line)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         "field '" + field + "' at column " + std::to_string(column) + ": " +
                         reason),
      field_(std::move(field)),
      column_(column),
      line_(line),
      reason_(reason) {}

std::optional<TraceFormat> parse_trace_format(std::string_view name) {
  if (name == "psv" || name == "pipe") return TraceFormat::CanonicalPipe;
  if (name == "ndjson" || name == "json") return TraceFormat::CanonicalJson;
  return std::nullopt;
}

UpdateRecord parse_line(std::string_view line) {
  line = trim_cr(line);

  std::vector<Field> fields;
  std::size_t start = 0;
  while (true) {
    const auto bar = line.find('|', start);
    const auto end = bar == std::string_view::npos ? line.size() : bar;
    fields.push_back({line.substr(start, end - start), start + 1});
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (fields.size() > kFieldCount) {
    throw ParseError("line", fields[kFieldCount].column,
                     "expected at most 8 fields, got " + std::to_string(fields.size()));
  }
  if (fields.size() < 4) {
    throw ParseError(kFieldNames[fields.size()], line.size() + 1, "missing field");
  }
  while (fields.size() < kFieldCount) fields.push_back({{}, line.size() + 1});

  auto fail = [&](std::size_t i, const std::string& why) -> ParseError {
    return ParseError(kFieldNames[i], fields[i].column, why);
  };

  UpdateRecord r;

  auto ts = parse_number<double>(fields[0].text);
  if (!ts || !std::isfinite(*ts)) throw fail(0, "not a decimal timestamp");
  r.ts = *ts;

  if (fields[1].text.empty()) throw fail(1, "empty peer id");
  r.peer = std::string(fields[1].text);

  if (fields[2].text == "A") {
    r.kind = UpdateKind::Announce;
  } else if (fields[2].text == "W") {
    r.kind = UpdateKind::Withdraw;
  } else {
    throw fail(2, "expected 'A' or 'W'");
  }

  std::string why;
  auto prefix = Prefix::try_parse(fields[3].text, &why);
  if (!prefix) throw fail(3, why);
  r.dest = *prefix;

  const bool withdraw = r.kind == UpdateKind::Withdraw;
  try {
    r.path = AsPath::parse(fields[4].text);
  } catch (const std::invalid_argument& e) {
    throw fail(4, e.what());
  }
  if (withdraw && !r.path.empty()) throw fail(4, "withdraw must have an empty AS path");
  if (!withdraw && r.path.empty()) throw fail(4, "announce requires an AS path");

  if (!fields[5].text.empty()) {
    if (withdraw) throw fail(5, "withdraw must not carry attributes");
    r.attrs.origin = parse_origin(fields[5].text);
    if (!r.attrs.origin) throw fail(5, "expected IGP, EGP or INCOMPLETE");
  }
  for (std::size_t i : {std::size_t{6}, std::size_t{7}}) {
    if (fields[i].text.empty()) continue;
    if (withdraw) throw fail(i, "withdraw must not carry attributes");
    auto v = parse_number<std::uint32_t>(fields[i].text);
    if (!v) throw fail(i, "not an unsigned 32-bit integer");
    (i == 6 ? r.attrs.med : r.attrs.local_pref) = *v;
  }
  return r;
}

std::string format_line(const UpdateRecord& r) {
  std::string out = format_double(r.ts);
  out += '|';
  out += r.peer;
  out += r.kind == UpdateKind::Announce ? "|A|" : "|W|";
  out += r.dest.to_string();
  out += '|';
  out += r.path.to_string();
  out += '|';
  if (r.attrs.origin) out += to_string(*r.attrs.origin);
  out += '|';
  if (r.attrs.med) out += std::to_string(*r.attrs.med);
  out += '|';
  if (r.attrs.local_pref) out += std::to_string(*r.attrs.local_pref);
  return out;
}

UpdateRecord parse_json_line(std::string_view line) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(trim_cr(line));
  } catch (const json::parse_error& e) {
    throw ParseError("line", e.byte, "invalid JSON");
  }
  if (!j.is_object()) throw ParseError("line", 1, "expected a JSON object");

  auto fail = [](const char* field, const std::string& why) {
    return ParseError(field, 0, why);
  };
  auto present = [&](const char* key) { return j.contains(key) && !j[key].is_null(); };

  UpdateRecord r;
  if (!present("ts") || !j["ts"].is_number()) throw fail("ts", "missing or not a number");
  r.ts = j["ts"].get<double>();

  if (!present("peer") || !j["peer"].is_string()) throw fail("peer", "missing or not a string");
  r.peer = j["peer"].get<std::string>();
  if (r.peer.empty()) throw fail("peer", "empty peer id");

  const auto kind = present("kind") && j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "A") {
    r.kind = UpdateKind::Announce;
  } else if (kind == "W") {
    r.kind = UpdateKind::Withdraw;
  } else {
    throw fail("kind", "expected 'A' or 'W'");
  }

  if (!present("prefix") || !j["prefix"].is_string()) throw fail("prefix", "missing prefix");
  std::string why;
  auto prefix = Prefix::try_parse(j["prefix"].get<std::string>(), &why);
  if (!prefix) throw fail("prefix", why);
  r.dest = *prefix;

  if (present("as_path")) {
    const auto& p = j["as_path"];
    if (p.is_string()) {
      try {
        r.path = AsPath::parse(p.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw fail("as_path", e.what());
      }
    } else if (p.is_array()) {
      for (const auto& hop : p) {
        if (!hop.is_number_unsigned()) throw fail("as_path", "non-integer ASN");
        r.path.hops.push_back(hop.get<Asn>());
      }
    } else {
      throw fail("as_path", "expected a string or an array");
    }
  }

  if (present("origin")) {
    if (!j["origin"].is_string()) throw fail("origin", "expected a string");
    const auto s = j["origin"].get<std::string>();
    if (!s.empty()) {
      r.attrs.origin = parse_origin(s);
      if (!r.attrs.origin) throw fail("origin", "expected IGP, EGP or INCOMPLETE");
    }
  }
  for (const char* key : {"med", "local_pref"}) {
    if (!present(key)) continue;
    if (!j[key].is_number_unsigned() || j[key].get<std::uint64_t>() > UINT32_MAX) {
      throw fail(key, "not an unsigned 32-bit integer");
    }
    (std::string_view(key) == "med" ? r.attrs.med : r.attrs.local_pref) =
        j[key].get<std::uint32_t>();
  }
  if (present("communities")) {
    if (!j["communities"].is_array()) throw fail("communities", "expected an array");
    std::vector<std::uint32_t> tags;
    for (const auto& c : j["communities"]) {
      if (!c.is_number_unsigned()) throw fail("communities", "non-integer tag");
      tags.push_back(c.get<std::uint32_t>());
    }
    r.attrs.communities = std::move(tags);
  }
  if (present("next_hop")) {
    auto addr = j["next_hop"].is_string() ? IpAddress::parse(j["next_hop"].get<std::string>())
                                          : std::nullopt;
    if (!addr) throw fail("next_hop", "not an IP address");
    r.attrs.next_hop = *addr;
  }

  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw fail(r.kind == UpdateKind::Withdraw && r.path.empty() ? "attributes" : "as_path",
               e.what());
  }
  return r;
}

std::string format_json_line(const UpdateRecord& r) {
  nlohmann::ordered_json j;
  j["ts"] = r.ts;
  j["peer"] = r.peer;
  j["kind"] = r.kind == UpdateKind::Announce ? "A" : "W";
  j["prefix"] = r.dest.to_string();
  j["as_path"] = r.path.hops;
  if (r.attrs.origin) j["origin"] = std::string(to_string(*r.attrs.origin));
  if (r.attrs.med) j["med"] = *r.attrs.med;
  if (r.attrs.local_pref) j["local_pref"] = *r.attrs.local_pref;
  if (r.attrs.communities) j["communities"] = *r.attrs.communities;
  if (r.attrs.next_hop) j["next_hop"] = r.attrs.next_hop->to_string();
  return j.dump();
}

UpdateRecord parse_record(std::string_view line, TraceFormat format) {
  return format == TraceFormat::CanonicalJson ? parse_json_line(line) : parse_line(line);
}

std::string format_record(const UpdateRecord& r, TraceFormat format) {
  return format == TraceFormat::CanonicalJson ? format_json_line(r) : format_line(r);
}

UpdateStream::UpdateStream(const TraceSource& src)
    : format_(src.format), strictness_(src.strictness), window_(src.reorder_window_secs) {
  if (src.stream) {
    in_ = src.stream;
  } else {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(src.path, ec)) {
      throw IngestError("cannot read trace '" + src.path.string() + "': no such file");
    }
    owned_ = std::make_unique<std::ifstream>(src.path);
    if (!*owned_) throw IngestError("cannot open trace '" + src.path.string() + "'");
    in_ = owned_.get();
  }
}

UpdateStream::~UpdateStream() = default;

bool UpdateStream::read_one() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    std::string_view view = trim_cr(line);
    if (view.empty() || view.front() == '#') continue;

    UpdateRecord rec;
    try {
      rec = parse_record(view, format_);
    } catch (const ParseError& e) {
      if (strictness_ == Strictness::Strict) throw e.at_line(line_no_);
      ++stats_.records_skipped;
      return true;
    }

    if (max_ts_ && rec.ts < *max_ts_) {
      ++stats_.out_of_order_count;
      if (rec.ts < *max_ts_ - window_) {
        if (strictness_ == Strictness::Strict) {
          throw IngestError("line " + std::to_string(line_no_) + ": timestamp " +
                            format_double(rec.ts) + " is more than " + format_double(window_) +
                            " s behind " + format_double(*max_ts_));
        }
        ++stats_.records_skipped;
        return true;
      }
    }
    if (!max_ts_ || rec.ts > *max_ts_) max_ts_ = rec.ts;
    ++stats_.records_ok;
    buffer_.push({std::move(rec), seq_++});
    return true;
  }
  if (in_->bad()) throw IngestError("read error at line " + std::to_string(line_no_ + 1));
  eof_ = true;
  return false;
}

std::optional<UpdateRecord> UpdateStream::next() {
  while (true) {
    if (!buffer_.empty() && (eof_ || buffer_.top().record.ts <= *max_ts_ - window_)) {
      UpdateRecord rec = std::move(const_cast<Pending&>(buffer_.top()).record);
      buffer_.pop();
      if (!stats_.first_ts) stats_.first_ts = rec.ts;
      stats_.last_ts = rec.ts;
      return rec;
    }
    if (eof_) return std::nullopt;
    read_one();
  }
}

std::vector<UpdateRecord> read_all(const TraceSource& src, IngestStats* stats) {
  UpdateStream stream(src);
  std::vector<UpdateRecord> out;
  while (auto r = stream.next()) out.push_back(std::move(*r));
  if (stats) *stats = stream.stats();
  return out;
}

}  // namespace pvstab
