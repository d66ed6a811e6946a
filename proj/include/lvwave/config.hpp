#pragma once

#include "lvwave/pde.hpp"
#include "lvwave/system.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace lvwave {

using Json = nlohmann::json;

/// Reads a config document and resolves its "include" list. Included files are resolved
/// relative to the including file, merged in order (later wins), and the including document's
/// own keys override them. Objects merge key by key; arrays and scalars replace.
/// Throws ConfigError on unreadable files, parse errors, include cycles and unknown keys.
Json load_config(const std::filesystem::path& path);

/// Same resolution for an in-memory document; includes are resolved against `base_dir`.
Json resolve_config(Json doc, const std::filesystem::path& base_dir);

/// Deep merge: `over` wins on conflicts.
Json merge_json(Json base, const Json& over);

/// FNV-1a 64-bit hash of the compact dump (keys sorted), as 16 hex digits.
std::string config_hash(const Json& resolved);

/// Coefficient from its config form: a number, a family name, or an object
/// {"constant": v}, {"trig": {...}}, {"step": {...}} or {"affine": {...}}.
/// `system` supplies the other coefficients for "@name" references inside "affine".
PeriodicFn parse_coefficient(const Json& form, const Json& families, const Json& system, int depth = 0);

/// System from a "system" section (explicit coefficients or {"preset": "step_competition"}).
SystemConfig parse_system(const Json& section, const Json& families = Json::object());

/// System of the document's "system" section; ConfigError when absent.
SystemConfig system_from(const Json& root);

/// Solver settings from "grid" {h, L, m}, "periods" {run, discard} and "threads".
struct RunSettings {
  Grid grid = Grid::from_spacing(60.0, 0.1);
  int steps_per_period = 0;
  long run_periods = 0, discard_periods = 0;
  int threads = 1;
};
RunSettings settings_from(const Json& root);

/// Command-line overrides applied to the document before hashing, so the embedded config
/// records what actually ran. Grid text is "h=<v>,L=<v>,m=<v>" (any subset); periods text is
/// "<run>,<discard>".
void apply_grid_override(Json& root, const std::string& text);
void apply_periods_override(Json& root, const std::string& text);

}  // namespace lvwave
