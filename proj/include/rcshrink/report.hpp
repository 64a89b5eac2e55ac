#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "rcshrink/analysis.hpp"
#include "rcshrink/errors.hpp"

namespace rcshrink {

/// Shortest decimal form that is guaranteed to round-trip: 17 significant digits.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw DataError("not a number: '" + s + "'");
  return v;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// SNR may be the +infinity sentinel, which JSON cannot carry as a number
inline nlohmann::json json_snr(double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); }

inline double json_to_double(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline constexpr const char* records_csv_header = "function,n,snr,rule,replication,mse,mae";
inline constexpr const char* summary_csv_header = "function,n,snr,rule,replications,amse,sd_mse,amae,sd_mae,complete";
inline constexpr const char* curves_csv_header = "theta,bias_sq,variance,risk";

inline void write_records_csv(const SimulationReport& report, std::ostream& out) {
  out << records_csv_header << '\n';
  for (const auto& r : report.records)
    out << to_string(r.function) << ',' << r.n << ',' << format_double(r.snr) << ',' << detail::csv_field(r.rule)
        << ',' << r.replication << ',' << format_double(r.mse) << ',' << format_double(r.mae) << '\n';
}

inline void write_summary_csv(const SimulationReport& report, std::ostream& out) {
  out << summary_csv_header << '\n';
  for (const auto& c : report.cells)
    out << to_string(c.function) << ',' << c.n << ',' << format_double(c.snr) << ',' << detail::csv_field(c.rule)
        << ',' << c.replications << ',' << format_double(c.amse) << ',' << format_double(c.sd_mse) << ','
        << format_double(c.amae) << ',' << format_double(c.sd_mae) << ',' << (c.complete ? "true" : "false")
        << '\n';
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv_table(std::istream& in, const char* header, std::size_t cols) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV is empty; expected header '" + std::string(header) + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw DataError("unexpected CSV header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = parse_csv_line(line);
    if (cells.size() != cols)
      throw DataError("CSV row " + std::to_string(row) + ": expected " + std::to_string(cols) + " columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace detail

inline std::vector<SimulationRecord> parse_records_csv(std::istream& in) {
  std::vector<SimulationRecord> out;
  for (const auto& c : detail::read_csv_table(in, records_csv_header, 7)) {
    SimulationRecord r;
    r.function = parse_test_function(c[0]);
    r.n = std::stoull(c[1]);
    r.snr = parse_double(c[2]);
    r.rule = c[3];
    r.replication = std::stoi(c[4]);
    r.mse = parse_double(c[5]);
    r.mae = parse_double(c[6]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<CellSummary> parse_summary_csv(std::istream& in) {
  std::vector<CellSummary> out;
  for (const auto& c : detail::read_csv_table(in, summary_csv_header, 10)) {
    CellSummary s;
    s.function = parse_test_function(c[0]);
    s.n = std::stoull(c[1]);
    s.snr = parse_double(c[2]);
    s.rule = c[3];
    s.replications = std::stoi(c[4]);
    s.amse = parse_double(c[5]);
    s.sd_mse = parse_double(c[6]);
    s.amae = parse_double(c[7]);
    s.sd_mae = parse_double(c[8]);
    s.complete = c[9] == "true";
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json to_json(const SimulationReport& report) {
  using nlohmann::json;
  json records = json::array(), cells = json::array();
  for (const auto& r : report.records) {
    json j{{"function", to_string(r.function)}, {"n", r.n},
           {"snr", detail::json_snr(r.snr)}, {"rule", r.rule},
           {"replication", r.replication},      {"mse", detail::json_number(r.mse)},
           {"mae", detail::json_number(r.mae)}};
    if (!r.error.empty()) j["error"] = r.error;
    records.push_back(std::move(j));
  }
  for (const auto& c : report.cells)
    cells.push_back({{"function", to_string(c.function)},
                     {"n", c.n},
                     {"snr", detail::json_snr(c.snr)},
                     {"rule", c.rule},
                     {"replications", c.replications},
                     {"amse", detail::json_number(c.amse)},
                     {"sd_mse", detail::json_number(c.sd_mse)},
                     {"amae", detail::json_number(c.amae)},
                     {"sd_mae", detail::json_number(c.sd_mae)},
                     {"complete", c.complete}});
  return {{"records", records}, {"cells", cells}, {"complete", report.complete()}};
}

inline SimulationReport report_from_json(const nlohmann::json& j) {
  auto snr = [](const nlohmann::json& v) {
    return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
  };
  SimulationReport rep;
  for (const auto& r : j.at("records")) {
    SimulationRecord rec;
    rec.function = parse_test_function(r.at("function").get<std::string>());
    rec.n = r.at("n").get<std::size_t>();
    rec.snr = snr(r.at("snr"));
    rec.rule = r.at("rule").get<std::string>();
    rec.replication = r.at("replication").get<int>();
    rec.mse = detail::json_to_double(r.at("mse"));
    rec.mae = detail::json_to_double(r.at("mae"));
    if (r.contains("error")) rec.error = r.at("error").get<std::string>();
    rep.records.push_back(std::move(rec));
  }
  for (const auto& c : j.at("cells")) {
    CellSummary s;
    s.function = parse_test_function(c.at("function").get<std::string>());
    s.n = c.at("n").get<std::size_t>();
    s.snr = snr(c.at("snr"));
    s.rule = c.at("rule").get<std::string>();
    s.replications = c.at("replications").get<int>();
    s.amse = detail::json_to_double(c.at("amse"));
    s.sd_mse = detail::json_to_double(c.at("sd_mse"));
    s.amae = detail::json_to_double(c.at("amae"));
    s.sd_mae = detail::json_to_double(c.at("sd_mae"));
    s.complete = c.at("complete").get<bool>();
    rep.cells.push_back(std::move(s));
  }
  return rep;
}

inline void write_curves_csv(const RiskCurves& c, std::ostream& out) {
  out << curves_csv_header << '\n';
  for (std::size_t i = 0; i < c.theta_grid.size(); ++i)
    out << format_double(c.theta_grid[i]) << ',' << format_double(c.bias_sq[i]) << ','
        << format_double(c.variance[i]) << ',' << format_double(c.risk[i]) << '\n';
}

inline nlohmann::json to_json(const RiskCurves& c) {
  return {{"params", {{"alpha", c.params.alpha}, {"tau", c.params.tau}, {"sigma", c.params.sigma}}},
          {"theta", c.theta_grid},
          {"bias_sq", c.bias_sq},
          {"variance", c.variance},
          {"risk", c.risk}};
}

inline RiskCurves parse_curves_csv(std::istream& in) {
  RiskCurves c;
  for (const auto& row : detail::read_csv_table(in, curves_csv_header, 4)) {
    c.theta_grid.push_back(parse_double(row[0]));
    c.bias_sq.push_back(parse_double(row[1]));
    c.variance.push_back(parse_double(row[2]));
    c.risk.push_back(parse_double(row[3]));
  }
  return c;
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace rcshrink
