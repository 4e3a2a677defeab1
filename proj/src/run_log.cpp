#include "gi/run_log.hpp"

#include <charconv>
#include <sstream>

namespace gi {

LogRow make_row(std::string family, std::string run, std::size_t eval, const EvaluationResult& r,
                std::string_view original_digest, std::optional<double> baseline) {
  LogRow row;
  row.family = std::move(family);
  row.run = std::move(run);
  row.eval = eval;
  row.patch = r.patch;
  row.fingerprint = r.fingerprint;
  row.original = r.fingerprint && *r.fingerprint == original_digest;
  row.classification = r.classification;
  row.tests_failed = r.tests_failed;
  row.runtime = r.runtime();
  row.baseline = baseline;
  return row;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted field");
  return fields;
}

std::string format_row(const LogRow& row) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  return csv_field(row.family) + "," + csv_field(row.run) + "," + std::to_string(row.eval) + "," +
         csv_field(serialize_patch(row.patch, row.fingerprint)) + "," + (row.original ? "1" : "0") + "," +
         std::string(classification_name(row.classification)) + "," + std::to_string(row.tests_failed) + "," +
         opt(row.runtime) + "," + opt(row.baseline);
}

std::string format_log(const std::vector<LogRow>& rows) {
  std::string out(kLogHeader);
  out += "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

LogFormatError::LogFormatError(std::size_t row, const std::string& message)
    : std::runtime_error("run log row " + std::to_string(row) + ": " + message), row_(row) {}

namespace {

template <typename T>
T parse_int(const std::string& s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::optional<double> parse_optional_number(const std::string& s, const char* what) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  return v;
}

// Records may span lines inside quoted fields.
std::vector<std::string> split_records(std::string_view text) {
  std::vector<std::string> records;
  std::string current;
  bool quoted = false;
  for (char c : text) {
    if (c == '"') quoted = !quoted;
    if (c == '\n' && !quoted) {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      records.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) records.push_back(std::move(current));
  return records;
}

}  // namespace

std::vector<LogRow> parse_log(std::string_view text, const std::string& base) {
  const auto records = split_records(text);
  if (records.empty() || records.front() != kLogHeader) throw LogFormatError(0, "missing or wrong header");
  std::vector<LogRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].empty()) continue;
    try {
      const auto f = split_csv_record(records[i]);
      if (f.size() != 9) throw std::invalid_argument("expected 9 fields, found " + std::to_string(f.size()));
      LogRow row;
      row.family = f[0];
      row.run = f[1];
      row.eval = parse_int<std::size_t>(f[2], "eval");
      auto sp = parse_serialized_patch(f[3], base);
      row.patch = std::move(sp.patch);
      row.fingerprint = std::move(sp.fingerprint);
      if (f[4] != "0" && f[4] != "1") throw std::invalid_argument("bad original flag '" + f[4] + "'");
      row.original = f[4] == "1";
      const auto c = parse_classification(f[5]);
      if (!c) throw std::invalid_argument("bad classification '" + f[5] + "'");
      row.classification = *c;
      row.tests_failed = parse_int<std::size_t>(f[6], "tests_failed");
      row.runtime = parse_optional_number(f[7], "runtime");
      row.baseline = parse_optional_number(f[8], "baseline");
      if (row.runtime.has_value() != (row.classification == Classification::Passed))
        throw std::invalid_argument("runtime must be present exactly for Passed rows");
      if (row.fingerprint.has_value() == (row.classification == Classification::Invalid))
        throw std::invalid_argument("fingerprint must be present exactly for valid rows");
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw LogFormatError(i, e.what());
    }
  }
  return rows;
}

}  // namespace gi
