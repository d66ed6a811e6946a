#include "lvwave/config.hpp"

#include "lvwave/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace lvwave {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> top_keys = {
    "include",  "description", "families",     "system",        "grid",          "periods",
    "threads",  "assumptions", "logistic",     "kinetics",      "simulate",      "speed",
    "limits_small", "limits_large", "sign_criteria", "sign_change", "residuals"};

const char* coefficient_names[] = {"d1", "d2", "r1", "r2", "a1", "a2", "k1", "k2"};

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("parse error in " + path.string() + ": " + e.what());
  }
}

Json resolve(Json doc, const fs::path& base, std::vector<fs::path>& stack) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  Json merged = Json::object();
  if (doc.contains("include")) {
    Json inc = doc["include"];
    if (inc.is_string()) inc = Json::array({inc});
    if (!inc.is_array()) throw ConfigError("\"include\" must be a string or an array of strings");
    for (const auto& item : inc) {
      if (!item.is_string()) throw ConfigError("\"include\" entries must be strings");
      const fs::path path = fs::weakly_canonical(base / item.get<std::string>());
      for (const auto& p : stack)
        if (p == path) throw ConfigError("include cycle through " + path.string());
      stack.push_back(path);
      merged = merge_json(std::move(merged), resolve(read_json(path), path.parent_path(), stack));
      stack.pop_back();
    }
    doc.erase("include");
  }
  return merge_json(std::move(merged), doc);
}

double number(const Json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return obj[key].get<double>();
}

std::vector<double> numbers(const Json& obj, const char* key) {
  if (!obj.contains(key)) return {};
  const Json& a = obj[key];
  if (!a.is_array()) throw ConfigError(std::string("\"") + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number()) throw ConfigError(std::string("\"") + key + "\" must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

Json merge_json(Json base, const Json& over) {
  if (!base.is_object() || !over.is_object()) return over;
  for (const auto& [key, value] : over.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object())
      base[key] = merge_json(std::move(base[key]), value);
    else
      base[key] = value;
  }
  return base;
}

Json resolve_config(Json doc, const fs::path& base_dir) {
  std::vector<fs::path> stack;
  Json out = resolve(std::move(doc), base_dir, stack);
  check_keys(out, top_keys, "config root");
  return out;
}

Json load_config(const fs::path& path) {
  const fs::path full = fs::weakly_canonical(path);
  std::vector<fs::path> stack{full};
  Json out = resolve(read_json(full), full.parent_path(), stack);
  check_keys(out, top_keys, "config root");
  return out;
}

std::string config_hash(const Json& resolved) {
  const std::string text = resolved.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PeriodicFn parse_coefficient(const Json& form, const Json& families, const Json& system, int depth) {
  if (depth > 16) throw ConfigError("coefficient references nest too deeply (cycle?)");
  if (form.is_number()) return PeriodicFn::constant(form.get<double>());
  if (form.is_string()) {
    const std::string name = form.get<std::string>();
    if (!name.empty() && name[0] == '@') {
      const std::string ref = name.substr(1);
      if (!system.contains(ref)) throw ConfigError("unknown coefficient reference " + name);
      return parse_coefficient(system[ref], families, system, depth + 1);
    }
    if (!families.contains(name)) throw ConfigError("unknown coefficient family \"" + name + "\"");
    return parse_coefficient(families[name], families, system, depth + 1);
  }
  if (!form.is_object() || form.size() != 1)
    throw ConfigError("coefficient must be a number, a family name or a one-key object");
  const auto& [kind, body] = *form.items().begin();
  try {
    if (kind == "constant") {
      if (!body.is_number()) throw ConfigError("\"constant\" takes a number");
      return PeriodicFn::constant(body.get<double>());
    }
    if (kind == "trig") {
      check_keys(body, {"mean", "cos", "sin"}, "trig coefficient");
      return PeriodicFn::trigonometric(number(body, "mean", 0.0), numbers(body, "cos"), numbers(body, "sin"));
    }
    if (kind == "step") {
      check_keys(body, {"values", "centers", "half_width"}, "step coefficient");
      return PeriodicFn::mollified_step(numbers(body, "values"), numbers(body, "centers"),
                                        number(body, "half_width", 0.02));
    }
    if (kind == "affine") {
      check_keys(body, {"of", "offset", "scale"}, "affine coefficient");
      if (!body.contains("of")) throw ConfigError("affine coefficient needs \"of\"");
      return parse_coefficient(body["of"], families, system, depth + 1)
          .affine(number(body, "offset", 0.0), number(body, "scale", 1.0));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid ") + kind + " coefficient: " + e.what());
  }
  throw ConfigError("unknown coefficient kind \"" + kind + "\"");
}

SystemConfig parse_system(const Json& section, const Json& families) {
  if (!section.is_object()) throw ConfigError("\"system\" must be an object");
  SystemConfig sys;
  if (section.contains("preset")) {
    check_keys(section, {"preset", "half_width", "T", "low", "high", "split", "frozen"}, "system preset");
    if (section["preset"] != "step_competition")
      throw ConfigError("unknown system preset " + section["preset"].dump());
    sys = step_competition_family(number(section, "half_width", 0.02), number(section, "T", 1.0),
                                  number(section, "low", 3.5), number(section, "high", 12.0),
                                  number(section, "split", 2.0 / 3.0));
  } else {
    check_keys(section, {"T", "d1", "d2", "r1", "r2", "a1", "a2", "k1", "k2", "frozen"}, "system");
    PeriodicFn* slots[] = {&sys.d1, &sys.d2, &sys.r1, &sys.r2, &sys.a1, &sys.a2, &sys.k1, &sys.k2};
    for (int i = 0; i < 8; ++i) {
      if (!section.contains(coefficient_names[i]))
        throw ConfigError(std::string("system is missing coefficient \"") + coefficient_names[i] + "\"");
      try {
        *slots[i] = parse_coefficient(section[coefficient_names[i]], families, section);
      } catch (const DomainError& e) {
        throw ConfigError(std::string("coefficient ") + coefficient_names[i] + ": " + e.what());
      }
    }
    sys.T = number(section, "T", 1.0);
  }
  try {
    sys.validate();
    if (section.contains("frozen")) sys = sys.frozen(number(section, "frozen", 0.0));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid system: ") + e.what());
  }
  return sys;
}

SystemConfig system_from(const Json& root) {
  if (!root.contains("system")) throw ConfigError("config has no \"system\" section");
  return parse_system(root["system"], root.value("families", Json::object()));
}

RunSettings settings_from(const Json& root) {
  RunSettings s;
  if (root.contains("grid")) {
    const Json& g = root["grid"];
    check_keys(g, {"h", "L", "m"}, "grid");
    const double h = number(g, "h", 0.1), L = number(g, "L", 60.0);
    if (!(h > 0.0) || !(L > 0.0)) throw ConfigError("grid h and L must be positive");
    s.grid = Grid::from_spacing(L, h);
    s.steps_per_period = static_cast<int>(number(g, "m", 0.0));
    if (s.steps_per_period < 0) throw ConfigError("grid m must be nonnegative");
  }
  if (root.contains("periods")) {
    const Json& p = root["periods"];
    check_keys(p, {"run", "discard"}, "periods");
    s.run_periods = static_cast<long>(number(p, "run", 0.0));
    s.discard_periods = static_cast<long>(number(p, "discard", 0.0));
    if (s.run_periods < 0 || s.discard_periods < 0) throw ConfigError("periods must be nonnegative");
  }
  if (root.contains("threads")) {
    if (!root["threads"].is_number_integer() || root["threads"].get<int>() < 1)
      throw ConfigError("\"threads\" must be a positive integer");
    s.threads = root["threads"].get<int>();
  }
  return s;
}

void apply_grid_override(Json& root, const std::string& text) {
  std::stringstream in(text);
  std::string item;
  Json& g = root["grid"];
  if (!g.is_object()) g = Json::object();
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("grid override \"" + item + "\" is not key=value");
    const std::string key = item.substr(0, eq);
    if (key != "h" && key != "L" && key != "m") throw ConfigError("grid override key must be h, L or m");
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
      if (key == "m")
        g[key] = static_cast<long>(v);
      else
        g[key] = v;
    } catch (const std::logic_error&) {
      throw ConfigError("grid override \"" + item + "\" has no numeric value");
    }
  }
}

void apply_periods_override(Json& root, const std::string& text) {
  const auto comma = text.find(',');
  try {
    const long run = std::stol(text.substr(0, comma));
    const long discard = comma == std::string::npos ? 0 : std::stol(text.substr(comma + 1));
    if (run < 0 || discard < 0) throw std::invalid_argument(text);
    root["periods"] = {{"run", run}, {"discard", discard}};
  } catch (const std::logic_error&) {
    throw ConfigError("periods override must be <run>,<discard>");
  }
}

}  // namespace lvwave
