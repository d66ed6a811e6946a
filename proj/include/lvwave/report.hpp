#pragma once

#include "lvwave/config.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace lvwave {

using Cell = std::variant<double, long, std::string>;

/// Named CSV table; doubles are written with 17 significant digits so reruns compare bitwise.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  std::string csv() const;
};

/// Outcome of one verb. `pass` maps to exit code 0 and a failed criterion to 2; solver errors
/// are reported through `error` with exit code 3.
struct RunResult {
  std::string verb;
  bool pass = false;
  std::string error;
  Json metrics = Json::object();
  std::vector<Table> tables;
  /// One line per checked criterion, e.g. "deviations strictly decreasing: yes".
  std::vector<std::string> checks;

  int exit_code() const { return !error.empty() ? 3 : pass ? 0 : 2; }
};

/// Summary document: schema version, verb, status, exit code, config hash, embedded config,
/// metrics, checks, error text and the list of emitted tables.
Json summary_json(const RunResult& result, const Json& config);

/// Writes every table as <out>/<name>.csv and the summary as <out>/summary.json.
void write_outputs(const RunResult& result, const Json& config, const std::filesystem::path& out);

}  // namespace lvwave
