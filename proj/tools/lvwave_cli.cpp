// Command-line front end: one verb per run, CSV tables and summary.json in --out.
// Exit codes: 0 pass, 1 usage or config error, 2 criterion failure, 3 solver error.

#include "lvwave/errors.hpp"
#include "lvwave/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
  using namespace lvwave;
  CLI::App app{"Periodic Lotka-Volterra competition waves"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = "out", grid_text, periods_text;
  int threads = 0;
  for (const auto& verb : verbs()) {
    CLI::App* sub = app.add_subcommand(verb, "run " + verb);
    sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default 1)")->check(CLI::PositiveNumber);
    sub->add_option("--grid", grid_text, "grid override h=<v>,L=<v>,m=<v>");
    sub->add_option("--periods", periods_text, "period override <run>,<discard>");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string verb = app.get_subcommands().front()->get_name();

  Json config;
  try {
    config = load_config(config_path);
    if (!grid_text.empty()) apply_grid_override(config, grid_text);
    if (!periods_text.empty()) apply_periods_override(config, periods_text);
    if (threads > 0) config["threads"] = threads;
    settings_from(config);
    system_from(config);
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }

  RunResult result;
  int code = 0;
  try {
    result = run_verb(verb, config);
    code = result.exit_code();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    result = RunResult{};
    result.verb = verb;
    result.error = e.what();
    code = 3;
  }

  try {
    write_outputs(result, config, out_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
    return 1;
  }
  for (const auto& line : result.checks) std::printf("%s\n", line.c_str());
  if (!result.error.empty()) std::fprintf(stderr, "solver error: %s\n", result.error.c_str());
  std::printf("%s: %s (config %s) -> %s/summary.json\n", verb.c_str(),
              code == 0 ? "pass" : code == 2 ? "fail" : "error", config_hash(config).c_str(), out_dir.c_str());
  return code;
}
