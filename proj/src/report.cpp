#include "lvwave/report.hpp"

#include "lvwave/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lvwave {

namespace fs = std::filesystem;

namespace {

std::string format_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

Json cell_json(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return std::isfinite(*d) ? Json(*d) : Json(nullptr);
  if (const long* l = std::get_if<long>(&c)) return *l;
  return std::get<std::string>(c);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw DomainError("row width does not match table " + name);
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += "\n";
  }
  return out;
}

Json summary_json(const RunResult& result, const Json& config) {
  Json tables = Json::array();
  for (const auto& t : result.tables) {
    Json rows = Json::array();
    // Small tables are embedded in full; large ones (profiles, residual fields) only by file.
    if (t.rows.size() <= 200)
      for (const auto& r : t.rows) {
        Json row = Json::array();
        for (const auto& c : r) row.push_back(cell_json(c));
        rows.push_back(std::move(row));
      }
    tables.push_back({{"name", t.name},
                      {"file", t.name + ".csv"},
                      {"columns", t.columns},
                      {"row_count", t.rows.size()},
                      {"rows", std::move(rows)}});
  }
  const int code = result.exit_code();
  return {{"schema_version", 1},
          {"verb", result.verb},
          {"status", code == 0 ? "pass" : code == 2 ? "fail" : "error"},
          {"exit_code", code},
          {"error", result.error},
          {"config_hash", config_hash(config)},
          {"config", config},
          {"metrics", result.metrics},
          {"checks", result.checks},
          {"tables", std::move(tables)}};
}

void write_outputs(const RunResult& result, const Json& config, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
  for (const auto& t : result.tables) write_file(out / (t.name + ".csv"), t.csv());
  write_file(out / "summary.json", summary_json(result, config).dump(2) + "\n");
}

}  // namespace lvwave
