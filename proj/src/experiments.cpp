#include "lvwave/experiments.hpp"

#include "lvwave/comparison.hpp"
#include "lvwave/errors.hpp"
#include "lvwave/kinetics.hpp"
#include "lvwave/logistic.hpp"
#include "lvwave/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace lvwave {

namespace {

Json section(const Json& root, const char* name, const std::set<std::string>& allowed) {
  if (!root.contains(name)) return Json::object();
  const Json& s = root[name];
  if (!s.is_object()) throw ConfigError(std::string("\"") + name + "\" must be an object");
  for (const auto& [key, value] : s.items())
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in \"" + name + "\"");
  return s;
}

double num(const Json& s, const char* key, double fallback) {
  if (!s.contains(key)) return fallback;
  if (!s[key].is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return s[key].get<double>();
}

std::vector<double> nums(const Json& s, const char* key, std::vector<double> fallback) {
  if (!s.contains(key)) return fallback;
  if (!s[key].is_array()) throw ConfigError(std::string("\"") + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : s[key]) {
    if (!x.is_number()) throw ConfigError(std::string("\"") + key + "\" must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

bool flag(const Json& s, const char* key, bool fallback) {
  if (!s.contains(key)) return fallback;
  if (!s[key].is_boolean()) throw ConfigError(std::string("\"") + key + "\" must be true or false");
  return s[key].get<bool>();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

SpeedOptions speed_options(const RunSettings& rs) {
  SpeedOptions o;
  o.grid = rs.grid;
  o.steps_per_period = rs.steps_per_period;
  o.run_periods = rs.run_periods;
  o.discard_periods = rs.discard_periods;
  return o;
}

// Time step of a periodic run under these settings.
double step_of(const SystemConfig& sys, const RunSettings& rs) {
  const int m = rs.steps_per_period > 0 ? rs.steps_per_period : default_steps_per_period(sys);
  return (sys.autonomous() ? 1.0 : sys.T) / m;
}

// Autonomous reference run with the same grid and (at most) the given time step.
SpeedEstimate reference_speed(const SystemConfig& autonomous, const RunSettings& rs, double dt) {
  SpeedOptions o = speed_options(rs);
  o.run_periods = o.discard_periods = 0;
  o.steps_per_period = std::max(100, static_cast<int>(std::ceil(1.0 / dt - 1e-9)));
  return measure_speed(autonomous, o);
}

// Speeds at each period, in parallel; UnconvergedSpeed reports the failing period.
std::vector<SpeedEstimate> speeds_over_periods(const SystemConfig& sys, const std::vector<double>& periods,
                                               const RunSettings& rs) {
  std::vector<SpeedEstimate> out(periods.size());
  parallel_for(periods.size(), rs.threads, [&](std::size_t i) {
    try {
      out[i] = measure_speed(sys.with_period(periods[i]), speed_options(rs));
    } catch (const UnconvergedSpeed& e) {
      throw ConvergenceError("speed at T = " + fmt(periods[i]) + " did not converge: " + e.what());
    }
  });
  return out;
}

std::string yes(bool b) { return b ? "yes" : "no"; }

std::string check_line(const std::string& what, bool ok) { return what + ": " + (ok ? "pass" : "fail"); }

Json estimate_json(const SpeedEstimate& e) {
  return {{"speed", e.speed},         {"ci", e.ci},       {"residual_rms", e.residual_rms},
          {"samples", e.times.size() - e.first_fit}, {"discard_periods", e.discard_periods},
          {"run_periods", e.run_periods}, {"stride", e.stride}, {"h", e.h}, {"dt", e.dt},
          {"converged", e.converged}};
}

Json lambdas_json(const Lambdas& l) {
  return {{"lambda1_minus", l.minus[0]}, {"lambda2_minus", l.minus[1]},
          {"lambda1_plus", l.plus[0]},   {"lambda2_plus", l.plus[1]}};
}

}  // namespace

double band_ratio(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*lo > 0.0)) return INFINITY;
  return *hi / *lo;
}

// ---------------------------------------------------------------- check-assumptions

RunResult run_check_assumptions(const Json& config) {
  const Json s = section(config, "assumptions", {"samples"});
  const SystemConfig sys = system_from(config);
  const int samples = static_cast<int>(num(s, "samples", 1024));
  RunResult r;
  r.verb = "check-assumptions";
  const A1Report a1 = check_a1(sys);
  const A2Report a2 = check_a2(sys, samples);
  const WangReport w = check_wang_conditions(sys, samples);
  const KineticModel model(sys);
  const Lambdas l = lambdas(model);
  const bool stable = l.min() > 0.0;
  r.metrics = {{"T", sys.T},
               {"A1", {{"holds", a1.holds}, {"margin1", a1.margin1}, {"margin2", a1.margin2}}},
               {"A2",
                {{"holds", a2.holds},
                 {"min_margin", a2.min_margin},
                 {"worst_s", a2.worst_s},
                 {"gamma0_candidate", a2.gamma0_candidate},
                 {"gamma0", a2.gamma0}}},
               {"wang", {{"a2", w.a2_cond}, {"a3", w.a3_cond}}},
               {"decay_exponents", lambdas_json(l)},
               {"zero_and_one_stable", stable},
               {"equal_diffusion_and_crowding", equal_diffusion_and_crowding(sys)},
               {"autonomous", sys.autonomous()}};
  Table t{"assumptions", {"s", "k1_p2_minus_r1", "k2_p1_minus_r2", "r1", "r2"}, {}};
  auto pts = assumption_samples(sys, samples);
  std::sort(pts.begin(), pts.end());
  for (double x : pts) {
    const double p1 = sys.r1(x) / sys.a1(x), p2 = sys.r2(x) / sys.a2(x);
    t.add({x, sys.k1(x) * p2 - sys.r1(x), sys.k2(x) * p1 - sys.r2(x), sys.r1(x), sys.r2(x)});
  }
  r.tables.push_back(std::move(t));
  r.checks = {check_line("(A1) or (A2)", a1.holds || a2.holds), check_line("0 and 1 linearly stable", stable)};
  r.pass = (a1.holds || a2.holds) && stable;
  return r;
}

// ---------------------------------------------------------------- logistic

RunResult run_logistic(const Json& config) {
  const Json s = section(config, "logistic", {"oracle_periods", "small_periods", "large_periods", "m", "samples"});
  const SystemConfig sys = system_from(config);
  const int m = static_cast<int>(num(s, "m", 2048));
  const int samples = static_cast<int>(num(s, "samples", 201));
  const auto oracle_periods = nums(s, "oracle_periods", {sys.T});
  const auto small = nums(s, "small_periods", {0.4, 0.2, 0.1, 0.05});
  const auto large = nums(s, "large_periods", {10, 20, 40, 80, 160});
  RunResult r;
  r.verb = "logistic";
  r.pass = true;

  const SemiTrivialStates st = semi_trivial_states(sys, m);
  Table states{"logistic_states", {"t", "p1", "p2"}, {}};
  for (int k = 0; k < samples; ++k) {
    const double t = sys.T * k / (samples - 1);
    states.add({t, st.p1(t), st.p2(t)});
  }
  r.tables.push_back(std::move(states));

  const PeriodicFn* rs[2] = {&sys.r1, &sys.r2};
  const PeriodicFn* as[2] = {&sys.a1, &sys.a2};
  Table oracle{"logistic_oracle", {"species", "T", "sup_diff"}, {}};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (double T : oracle_periods) {
      const auto a = periodic_logistic_closed_form(*rs[i], *as[i], T, m, i + 1);
      const auto b = periodic_logistic_ode(*rs[i], *as[i], T, m, i + 1);
      double d = 0.0;
      for (std::size_t k = 0; k < a.values().size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
      worst = std::max(worst, d);
      oracle.add({static_cast<long>(i + 1), T, d});
    }
  r.tables.push_back(std::move(oracle));
  const bool oracle_ok = worst <= 1e-8;
  r.checks.push_back(check_line("closed form within 1e-8 of the ODE oracle", oracle_ok));
  r.pass = r.pass && oracle_ok;
  r.metrics["oracle_sup_diff"] = worst;

  Table ts{"logistic_small", {"species", "T", "deviation", "deviation_over_T"}, {}};
  Table tl{"logistic_large", {"species", "T", "deviation", "T_times_deviation"}, {}};
  for (int i = 0; i < 2; ++i) {
    const std::string tag = "p" + std::to_string(i + 1);
    if (!small.empty()) {
      const LimitTable lt = small_period_limit_check(*rs[i], *as[i], small, m);
      bool trivial = true;
      for (const auto& row : lt.rows) {
        ts.add({static_cast<long>(i + 1), row.T, row.deviation, row.scaled});
        trivial = trivial && row.deviation <= 1e-13;
      }
      const bool ok = trivial || lt.strictly_decreasing;
      r.checks.push_back(check_line(tag + " small-period deviations strictly decreasing", ok));
      r.metrics[tag + "_small_band"] = lt.band;
      r.pass = r.pass && ok;
    }
    if (!large.empty()) {
      const LimitTable lt = large_period_rate_check(*rs[i], *as[i], large, m);
      bool trivial = true;
      for (const auto& row : lt.rows) {
        tl.add({static_cast<long>(i + 1), row.T, row.deviation, row.scaled});
        trivial = trivial && row.deviation <= 1e-13;
      }
      const bool ok = trivial || lt.band <= 4.0;
      r.checks.push_back(check_line(tag + " large-period T * deviation within a factor 4", ok));
      r.metrics[tag + "_large_band"] = lt.band;
      r.pass = r.pass && ok;
    }
  }
  r.tables.push_back(std::move(ts));
  r.tables.push_back(std::move(tl));
  return r;
}

// ---------------------------------------------------------------- kinetics

RunResult run_kinetics_report(const Json& config) {
  const Json s = section(config, "kinetics", {"periods", "sections", "separatrix_points", "seed", "orbit_samples"});
  const SystemConfig base = system_from(config);
  const auto periods = nums(s, "periods", {base.T});
  const auto sections = nums(s, "sections", {});
  const int n_sep = static_cast<int>(num(s, "separatrix_points", 200));
  const int orbit_samples = static_cast<int>(num(s, "orbit_samples", 200));
  RunResult r;
  r.verb = "kinetics";
  r.pass = true;

  Vec2 seed(0.5, 0.5);
  if (s.contains("seed")) {
    const auto v = nums(s, "seed", {});
    if (v.size() != 2) throw ConfigError("\"seed\" must have two entries");
    seed = {v[0], v[1]};
  } else {
    try {
      seed = frozen_equilibria(base.homogenized(), 0.0).saddle;
    } catch (const DomainError&) {
    }
  }
  r.metrics["seed"] = {seed[0], seed[1]};

  Table t{"kinetics",
          {"T", "coexistence_found", "v1_0", "v2_0", "lambda_T", "log_mod_mu1", "log_mod_mu2", "lambda1_minus",
           "lambda2_minus", "lambda1_plus", "lambda2_plus"},
          {}};
  Table orbits{"coexistence_orbits", {"T", "t", "v1", "v2"}, {}};
  Json per = Json::array();
  for (double T : periods) {
    const KineticModel model(base.with_period(T));
    const Lambdas l = lambdas(model);
    const bool stable = l.min() > 0.0;
    bool found = false, unstable = false;
    double lam = NAN, lm1 = NAN, lm2 = NAN;
    Vec2 v0(NAN, NAN);
    std::string note;
    try {
      const auto traj = find_interior_fixed_point(model, seed);
      const auto fl = floquet(model, traj);
      found = true;
      lam = fl.lambda;
      lm1 = fl.log_multiplier[0].real();
      lm2 = fl.log_multiplier[1].real();
      v0 = traj.v.front();
      unstable = lam < -1e-6;
      const int stride = std::max<int>(1, static_cast<int>(traj.t.size()) / orbit_samples);
      for (std::size_t k = 0; k < traj.t.size(); k += stride) orbits.add({T, traj.t[k], traj.v[k][0], traj.v[k][1]});
    } catch (const NoInteriorFixedPoint& e) {
      note = e.what();
    }
    t.add({T, found ? "yes" : "no", v0[0], v0[1], lam, lm1, lm2, l.minus[0], l.minus[1], l.plus[0], l.plus[1]});
    Json row = {{"T", T}, {"coexistence_found", found}, {"lambda_T", found ? Json(lam) : Json(nullptr)},
                {"coexistence_unstable", unstable}, {"zero_and_one_stable", stable},
                {"decay_exponents", lambdas_json(l)}};
    if (!note.empty()) row["note"] = note;
    per.push_back(row);
    r.checks.push_back(check_line("T = " + fmt(T) + ": coexistence state found with lambda_T < -1e-6",
                                  found && unstable));
    r.checks.push_back(check_line("T = " + fmt(T) + ": 0 and 1 strongly stable", stable));
    r.pass = r.pass && found && unstable && stable;
  }
  r.metrics["periods"] = per;
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(orbits));

  if (!sections.empty()) {
    Table sep{"separatrix", {"s", "v1", "v2"}, {}};
    for (double x : sections) {
      const Separatrix c = separatrix(base, x, n_sep);
      for (const Vec2& p : c.points) sep.add({x, p[0], p[1]});
    }
    r.tables.push_back(std::move(sep));
  }
  return r;
}

// ---------------------------------------------------------------- simulate

RunResult run_simulate(const Json& config) {
  const Json s = section(config, "simulate", {"snapshots", "node_stride", "init_width"});
  const SystemConfig sys = system_from(config);
  const RunSettings rs = settings_from(config);
  const int snapshots = static_cast<int>(num(s, "snapshots", 5));
  const int node_stride = std::max(1, static_cast<int>(num(s, "node_stride", 10)));
  const KineticModel model(sys);
  const double P = sys.autonomous() ? 1.0 : sys.T;
  const int m = rs.steps_per_period > 0 ? rs.steps_per_period : default_steps_per_period(sys);
  const long periods = rs.run_periods > 0 ? rs.run_periods : default_run_plan(sys).run_periods;
  const double dt = P / m;
  const int chunk = std::max(1, std::min(m, static_cast<int>(std::ceil(1.0 / dt))));

  RunResult r;
  r.verb = "simulate";
  DenormalGuard guard;
  WaveField field = initialize_front(rs.grid, num(s, "init_width", 5.0));
  ImexStepper stepper(model, dt);
  Table front{"front", {"t", "position"}, {}};
  Table prof{"profiles", {"t", "x", "v1", "v2", "u1", "u2"}, {}};
  const auto snapshot = [&]() {
    const double p1 = model.states().p1(field.t), p2 = model.states().p2(field.t);
    for (int j = 0; j <= field.cells(); j += node_stride) {
      const Vec2 u = from_cooperative({field.v1[j], field.v2[j]}, p1, p2);
      prof.add({field.t, field.x(j) + field.shift, field.v1[j], field.v2[j], u[0], u[1]});
    }
  };
  front.add({0.0, front_position(field)});
  snapshot();
  const long every = std::max<long>(1, periods / std::max(1, snapshots));
  for (long p = 1; p <= periods; ++p) {
    for (int done = 0; done < m; done += chunk) {
      stepper.advance(field, std::min(chunk, m - done));
      recenter(field);
    }
    field.t = p * P;
    front.add({field.t, front_position(field)});
    if (p % every == 0 || p == periods) snapshot();
  }
  // Average speed over the second half of the run, for orientation only.
  const std::size_t half = front.rows.size() / 2;
  const double t0 = std::get<double>(front.rows[half][0]), x0 = std::get<double>(front.rows[half][1]);
  const double t1 = std::get<double>(front.rows.back()[0]), x1 = std::get<double>(front.rows.back()[1]);
  r.metrics = {{"periods", periods}, {"dt", dt}, {"h", field.h}, {"L", rs.grid.L},
               {"mean_speed_second_half", (x1 - x0) / (t1 - t0)}};
  r.tables.push_back(std::move(front));
  r.tables.push_back(std::move(prof));
  r.checks.push_back(check_line("run completed", true));
  r.pass = true;
  return r;
}

// ---------------------------------------------------------------- speed

RunResult run_speed(const Json& config) {
  const Json s = section(config, "speed", {"periods", "frozen", "homogenized", "mean_frozen", "tol", "reference_tol",
                                           "nodes_per_piece"});
  const SystemConfig sys = system_from(config);
  const RunSettings rs = settings_from(config);
  const double tol = num(s, "tol", 1e-3), ref_tol = num(s, "reference_tol", 0.02);
  const auto periods = nums(s, "periods", s.contains("frozen") ? std::vector<double>{} : std::vector<double>{sys.T});
  const auto frozen = nums(s, "frozen", {});
  const bool hom = flag(s, "homogenized", false), mean = flag(s, "mean_frozen", false);
  const bool family = matches_step_family(sys);

  struct Job {
    std::string kind;
    double parameter;
    SystemConfig system;
    std::optional<double> reference;
  };
  std::vector<Job> jobs;
  for (double T : periods) jobs.push_back({"periodic", T, sys.with_period(T), std::nullopt});
  for (double x : frozen)
    jobs.push_back({"frozen", x, sys.frozen(x), family ? std::optional(exact_speed(sys.r2(x))) : std::nullopt});
  if (hom) {
    if (!check_a1(sys).holds) throw DomainError("homogenized wave needs (A1)");
    jobs.push_back({"homogenized", 0.0, sys.homogenized(),
                    family ? std::optional(exact_speed(sys.r2.mean())) : std::nullopt});
  }

  std::vector<SpeedEstimate> est(jobs.size());
  parallel_for(jobs.size(), rs.threads, [&](std::size_t i) {
    SpeedOptions o = speed_options(rs);
    o.strict = false;
    est[i] = measure_speed(jobs[i].system, o);
  });

  RunResult r;
  r.verb = "speed";
  r.pass = true;
  Table t{"speed", {"kind", "parameter", "speed", "ci", "residual_rms", "converged", "sign", "reference", "abs_error"}, {}};
  Json rows = Json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& e = est[i];
    const double ref = jobs[i].reference.value_or(NAN);
    const double err = std::abs(e.speed - ref);
    t.add({jobs[i].kind, jobs[i].parameter, e.speed, e.ci, e.residual_rms, yes(e.converged),
           to_string(sign_classify(e, tol)), ref, err});
    Json row = estimate_json(e);
    row["kind"] = jobs[i].kind;
    row["parameter"] = jobs[i].parameter;
    row["sign"] = to_string(sign_classify(e, tol));
    if (jobs[i].reference) row["reference"] = ref;
    rows.push_back(row);
    const std::string label = jobs[i].kind + " " + fmt(jobs[i].parameter);
    r.checks.push_back(check_line(label + " converged", e.converged));
    r.pass = r.pass && e.converged;
    if (jobs[i].reference) {
      const bool ok = err <= ref_tol;
      r.checks.push_back(check_line(label + " within " + fmt(ref_tol) + " of the closed form", ok));
      r.pass = r.pass && ok;
    }
  }
  if (mean) {
    MeanSpeedOptions mo;
    mo.nodes_per_piece = static_cast<int>(num(s, "nodes_per_piece", 16));
    mo.pde = speed_options(rs);
    mo.threads = rs.threads;
    const MeanFrozenSpeed mf = mean_frozen_speed(sys, mo);
    t.add({"mean_frozen", 0.0, mf.value, 0.0, 0.0, "yes", to_string(sign_classify(mf.value, 0.0, tol)), NAN, NAN});
    r.metrics["mean_frozen_speed"] = {{"value", mf.value}, {"exact", mf.exact}, {"nodes_per_piece", mf.nodes_per_piece}};
  }
  r.metrics["runs"] = rows;
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------- limits

RunResult run_limits_small(const Json& config) {
  const Json s = section(config, "limits_small", {"periods", "band", "noise"});
  const SystemConfig sys = system_from(config);
  const RunSettings rs = settings_from(config);
  const auto periods = nums(s, "periods", {0.4, 0.2, 0.1, 0.05});
  const double band_limit = num(s, "band", 4.0), noise = num(s, "noise", 2e-3);
  if (periods.empty()) throw ConfigError("limits_small needs at least one period");
  for (std::size_t i = 1; i < periods.size(); ++i)
    if (!(periods[i] < periods[i - 1])) throw ConfigError("limits_small periods must be decreasing");
  if (!check_a1(sys).holds) throw DomainError("small-period limit needs (A1)");

  double dt = INFINITY;
  for (double T : periods) dt = std::min(dt, step_of(sys.with_period(T), rs));
  const SpeedEstimate c0 = reference_speed(sys.homogenized(), rs, dt);
  const auto est = speeds_over_periods(sys, periods, rs);

  RunResult r;
  r.verb = "limits-small";
  Table t{"limits_small", {"T", "c_T", "ci", "c0", "deviation", "deviation_over_T"}, {}};
  std::vector<double> dev, scaled;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    dev.push_back(std::abs(est[i].speed - c0.speed));
    scaled.push_back(dev.back() / periods[i]);
    t.add({periods[i], est[i].speed, est[i].ci, c0.speed, dev.back(), scaled.back()});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < dev.size(); ++i) decreasing = decreasing && dev[i] < dev[i - 1];
  const double band = band_ratio(scaled);
  r.metrics = {{"c0", estimate_json(c0)}, {"band", std::isfinite(band) ? Json(band) : Json(nullptr)},
               {"strictly_decreasing", decreasing}, {"autonomous", sys.autonomous()}};
  if (matches_step_family(sys)) r.metrics["c0_closed_form"] = exact_speed(sys.r2.mean());
  if (sys.autonomous()) {
    // No oscillation: every c_T is the same wave, so only estimator noise remains.
    const bool ok = *std::max_element(dev.begin(), dev.end()) <= noise;
    r.checks.push_back(check_line("constant coefficients: |c_T - c0| within estimator noise", ok));
    r.pass = ok;
  } else {
    r.checks.push_back(check_line("deviations strictly decreasing", decreasing));
    r.checks.push_back(check_line("|c_T - c0| / T within a factor " + fmt(band_limit), band <= band_limit));
    r.pass = decreasing && band <= band_limit;
  }
  r.tables.push_back(std::move(t));
  return r;
}

RunResult run_limits_large(const Json& config) {
  const Json s = section(config, "limits_large", {"periods", "band", "noise", "nodes_per_piece"});
  const SystemConfig sys = system_from(config);
  const RunSettings rs = settings_from(config);
  const auto periods = nums(s, "periods", {10, 20, 40, 80});
  const double band_limit = num(s, "band", 4.0), noise = num(s, "noise", 2e-3);
  if (periods.empty()) throw ConfigError("limits_large needs at least one period");
  for (std::size_t i = 1; i < periods.size(); ++i)
    if (!(periods[i] > periods[i - 1])) throw ConfigError("limits_large periods must be increasing");
  if (!check_a2(sys).holds) throw DomainError("large-period limit needs (A2)");

  MeanSpeedOptions mo;
  mo.nodes_per_piece = static_cast<int>(num(s, "nodes_per_piece", 16));
  mo.pde = speed_options(rs);
  mo.pde.run_periods = mo.pde.discard_periods = 0;
  mo.threads = rs.threads;
  const MeanFrozenSpeed cstar = mean_frozen_speed(sys, mo);
  const auto est = speeds_over_periods(sys, periods, rs);

  RunResult r;
  r.verb = "limits-large";
  Table t{"limits_large", {"T", "c_T", "ci", "c_star", "deviation", "T_times_deviation"}, {}};
  std::vector<double> dev, scaled;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    dev.push_back(std::abs(est[i].speed - cstar.value));
    scaled.push_back(dev.back() * periods[i]);
    t.add({periods[i], est[i].speed, est[i].ci, cstar.value, dev.back(), scaled.back()});
  }
  const double band = band_ratio(scaled);
  r.metrics = {{"c_star", {{"value", cstar.value}, {"exact", cstar.exact}, {"nodes_per_piece", cstar.nodes_per_piece}}},
               {"band", std::isfinite(band) ? Json(band) : Json(nullptr)},
               {"autonomous", sys.autonomous()}};
  if (sys.autonomous()) {
    const bool ok = *std::max_element(dev.begin(), dev.end()) <= noise;
    r.checks.push_back(check_line("constant coefficients: |c_T - c*| within estimator noise", ok));
    r.pass = ok;
  } else {
    r.checks.push_back(check_line("T |c_T - c*| within a factor " + fmt(band_limit), band <= band_limit));
    r.pass = band <= band_limit;
  }
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------- sign criteria

std::string to_string(SignPrediction p) {
  switch (p) {
    case SignPrediction::positive: return "positive";
    case SignPrediction::negative: return "negative";
    case SignPrediction::nonnegative: return "nonnegative";
    case SignPrediction::nonpositive: return "nonpositive";
    case SignPrediction::zero: return "zero";
    case SignPrediction::none: return "none";
  }
  return "none";
}

bool equal_diffusion_and_crowding(const SystemConfig& sys) {
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); };
  for (double x : assumption_samples(sys, 1024))
    if (!close(sys.d1(x), sys.d2(x)) || !close(sys.a1(x), sys.a2(x))) return false;
  return true;
}

SignPrediction predict_sign(const SystemConfig& sys) {
  bool first = true, second = true, ratios_equal = true, identical = true;
  const double eps = 1e-12;
  for (double x : assumption_samples(sys, 1024)) {
    const double k1 = sys.k1(x), k2 = sys.k2(x), r1 = sys.r1(x), r2 = sys.r2(x);
    first = first && k1 <= k2 + eps && r1 >= r2 - eps;
    second = second && k1 >= k2 - eps && r1 <= r2 + eps;
    ratios_equal = ratios_equal && std::abs(r1 / k1 - r2 / k2) <= eps;
    identical = identical && std::abs(k1 - k2) <= eps && std::abs(r1 - r2) <= eps;
  }
  if (identical) return SignPrediction::zero;
  if (first) return ratios_equal ? SignPrediction::nonnegative : SignPrediction::positive;
  if (second) return ratios_equal ? SignPrediction::nonpositive : SignPrediction::negative;
  return SignPrediction::none;
}

RunResult run_sign_criteria(const Json& config) {
  const Json s = section(config, "sign_criteria", {"cases", "tol", "mirror"});
  const RunSettings rs = settings_from(config);
  const double tol = num(s, "tol", 1e-3);
  const bool mirror = flag(s, "mirror", true);
  const Json families = config.value("families", Json::object());
  if (!s.contains("cases") || !s["cases"].is_array() || s["cases"].empty())
    throw ConfigError("sign_criteria needs a nonempty \"cases\" array");

  struct Case {
    std::string name;
    SystemConfig sys;
    SignPrediction prediction;
  };
  std::vector<Case> cases;
  for (const auto& c : s["cases"]) {
    if (!c.is_object() || !c.contains("system")) throw ConfigError("each sign_criteria case needs a \"system\"");
    for (const auto& [key, value] : c.items())
      if (key != "name" && key != "system") throw ConfigError("unknown key \"" + key + "\" in a sign_criteria case");
    Case k{c.value("name", "case" + std::to_string(cases.size() + 1)), parse_system(c["system"], families),
           SignPrediction::none};
    if (!equal_diffusion_and_crowding(k.sys))
      throw ConfigError("case " + k.name + ": the sign criteria need d1 = d2 and a1 = a2");
    if (!(lambdas(KineticModel(k.sys)).min() > 0.0))
      throw ConfigError("case " + k.name + ": 0 and 1 are not both linearly stable");
    k.prediction = predict_sign(k.sys);
    cases.push_back(std::move(k));
  }

  // Direct runs first, then the mirrored systems.
  const std::size_t n = cases.size();
  std::vector<SpeedEstimate> est(mirror ? 2 * n : n);
  parallel_for(est.size(), rs.threads, [&](std::size_t i) {
    const SystemConfig& sys = cases[i % n].sys;
    est[i] = measure_speed(i < n ? sys : sys.swapped(), speed_options(rs));
  });

  RunResult r;
  r.verb = "sign-criteria";
  r.pass = true;
  Table t{"sign_criteria",
          {"case", "prediction", "speed", "ci", "classification", "mirror_speed", "mirror_ci", "mirror_gap"},
          {}};
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const SpeedEstimate& e = est[i];
    const SpeedSign cls = sign_classify(e, tol);
    bool ok = true;
    switch (cases[i].prediction) {
      case SignPrediction::zero: ok = std::abs(e.speed) <= tol; break;
      case SignPrediction::positive: ok = cls == SpeedSign::positive; break;
      case SignPrediction::negative: ok = cls == SpeedSign::negative; break;
      case SignPrediction::nonnegative: ok = cls == SpeedSign::positive || cls == SpeedSign::zero; break;
      case SignPrediction::nonpositive: ok = cls == SpeedSign::negative || cls == SpeedSign::zero; break;
      case SignPrediction::none: break;
    }
    const std::string label = "case " + cases[i].name + " (" + to_string(cases[i].prediction) + ")";
    r.checks.push_back(check_line(label + " classified " + to_string(cls), ok));
    r.pass = r.pass && ok;
    double ms = NAN, mci = NAN, gap = NAN;
    if (mirror) {
      ms = est[n + i].speed;
      mci = est[n + i].ci;
      gap = std::abs(e.speed + ms);
      // The CI does not cover floating-point roundoff; a symmetric case has ci ~ 1e-12.
      const bool mok = gap <= 2.0 * std::max(e.ci, mci) + 1e-9;
      r.checks.push_back(check_line(label + " mirrored speed negated within 2 CI", mok));
      r.pass = r.pass && mok;
    }
    t.add({cases[i].name, to_string(cases[i].prediction), e.speed, e.ci, to_string(cls), ms, mci, gap});
    Json row = estimate_json(e);
    row["name"] = cases[i].name;
    row["prediction"] = to_string(cases[i].prediction);
    row["classification"] = to_string(cls);
    if (mirror) row["mirror"] = estimate_json(est[n + i]);
    rows.push_back(row);
  }
  r.metrics = {{"cases", rows}, {"tol", tol}};
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------- sign change

RunResult run_sign_change(const Json& config) {
  const Json s = section(config, "sign_change", {"small_period", "large_period", "tol", "nodes_per_piece"});
  const SystemConfig sys = system_from(config);
  const RunSettings rs = settings_from(config);
  const double T1 = num(s, "small_period", 0.05), T2 = num(s, "large_period", 50.0), tol = num(s, "tol", 1e-3);
  if (!(T1 > 0.0 && T2 > T1)) throw ConfigError("sign_change needs 0 < small_period < large_period");
  const bool family = matches_step_family(sys);

  const auto est = speeds_over_periods(sys, {T1, T2}, rs);
  double c0 = NAN;
  std::string c0_source;
  if (family) {
    c0 = exact_speed(sys.r2.mean());
    c0_source = "closed form";
  } else {
    c0 = reference_speed(sys.homogenized(), rs, step_of(sys.with_period(T1), rs)).speed;
    c0_source = "measured";
  }
  MeanSpeedOptions mo;
  mo.nodes_per_piece = static_cast<int>(num(s, "nodes_per_piece", 16));
  mo.pde = speed_options(rs);
  mo.pde.run_periods = mo.pde.discard_periods = 0;
  mo.threads = rs.threads;
  const MeanFrozenSpeed cstar = mean_frozen_speed(sys, mo);

  const SpeedSign s1 = sign_classify(est[0], tol), s2 = sign_classify(est[1], tol);
  const auto sgn = [](double v) { return v > 0 ? SpeedSign::positive : v < 0 ? SpeedSign::negative : SpeedSign::zero; };
  RunResult r;
  r.verb = "sign-change";
  const bool opposite = c0 * cstar.value < 0.0;
  const bool small_ok = s1 == sgn(c0) && s1 != SpeedSign::zero;
  const bool large_ok = s2 == sgn(cstar.value) && s2 != SpeedSign::zero;
  r.checks = {check_line("c0 and c* have opposite signs", opposite),
              check_line("T = " + fmt(T1) + " classified " + to_string(s1) + " like c0", small_ok),
              check_line("T = " + fmt(T2) + " classified " + to_string(s2) + " like c*", large_ok)};
  r.pass = opposite && small_ok && large_ok;
  Table t{"sign_change", {"quantity", "T", "value", "ci", "sign"}, {}};
  t.add({"c0", 0.0, c0, 0.0, to_string(sgn(c0))});
  t.add({"c_star", INFINITY, cstar.value, 0.0, to_string(sgn(cstar.value))});
  t.add({"c_T", T1, est[0].speed, est[0].ci, to_string(s1)});
  t.add({"c_T", T2, est[1].speed, est[1].ci, to_string(s2)});
  r.metrics = {{"c0", c0},
               {"c0_source", c0_source},
               {"c_star", cstar.value},
               {"c_star_exact", cstar.exact},
               {"small", estimate_json(est[0])},
               {"large", estimate_json(est[1])},
               {"tol", tol}};
  r.metrics["small"]["T"] = T1;
  r.metrics["small"]["sign"] = to_string(s1);
  r.metrics["large"]["T"] = T2;
  r.metrics["large"]["sign"] = to_string(s2);
  r.tables.push_back(std::move(t));
  return r;
}

// ---------------------------------------------------------------- residuals

RunResult run_residuals(const Json& config) {
  const Json s = section(config, "residuals", {"tol", "transient", "eps", "K", "xi0", "margin", "emit_stride",
                                               "uniform_eps", "uniform_periods", "uniform_samples", "uniform_tol"});
  const SystemConfig sys = system_from(config);
  const KineticModel model(sys);
  const double tol = num(s, "tol", 1e-3);
  // This verb has its own grid defaults: the tol / 2 truncation budget needs fine steps.
  double h = 0.05, L = 20.0;
  int m = 4096;
  if (config.contains("grid")) {
    const Json& g = config["grid"];
    h = num(g, "h", h);
    L = num(g, "L", L);
    m = static_cast<int>(num(g, "m", m));
  }
  if (m <= 0) m = 4096;
  const double P = sys.autonomous() ? 1.0 : sys.T;
  const int margin = static_cast<int>(num(s, "margin", 8));
  const int emit_stride = std::max(1, static_cast<int>(num(s, "emit_stride", 64)));

  RunResult r;
  r.verb = "residuals";
  r.pass = true;
  const WaveRecording rec = record_wave(model, Grid::from_spacing(L, h), P / m, num(s, "transient", 40.0), m + 1);
  const SpaceTimeGrid g{rec.t0, rec.dt, static_cast<int>(rec.v1.size()), rec.x0, rec.h,
                        static_cast<int>(rec.v1.front().size())};
  Table field{"residual_field", {"t", "x", "L1", "L2"}, {}};
  long counter = 0;
  const auto wave = check_residuals(
      model, g, [&](int k, Eigen::ArrayXd& a, Eigen::ArrayXd& b) { a = rec.v1[k]; b = rec.v2[k]; },
      ResidualKind::solution, tol, [&](double t, double x, double l1, double l2) {
        if (counter++ % emit_stride == 0) field.add({t, x, l1, l2});
      });
  r.checks.push_back(check_line("converged wave residual within +-tol", wave.pass));
  r.pass = r.pass && wave.pass;
  Table t{"residuals", {"candidate", "eps", "K", "min_L1", "min_L2", "max_L1", "max_L2", "truncation", "pass"}, {}};
  t.add({"wave", 0.0, 0.0, wave.min[0], wave.min[1], wave.max[0], wave.max[1], wave.truncation, yes(wave.pass)});

  const Lambdas l = lambdas(model);
  const double mu = choose_mu(l);
  const EigenSystem es = normalized_eigenfunctions(model, mu);
  WaveField f;
  f.v1 = rec.v1.front();
  f.v2 = rec.v2.front();
  f.L = -rec.x0;
  f.h = rec.h;
  const double front = front_crossing(f);
  const double K = num(s, "K", 100.0), xi0 = num(s, "xi0", 0.0);
  for (double eps : nums(s, "eps", {1e-4, 1e-3})) {
    for (int sign : {1, -1}) {
      const PerturbedWave pw{&rec, &es, eps, K, xi0, sign, front};
      const auto rep = check_residuals(model, pw.grid(margin), pw.source(margin),
                                       sign > 0 ? ResidualKind::super_solution : ResidualKind::sub_solution, tol);
      const std::string name = sign > 0 ? "super" : "sub";
      t.add({name, eps, K, rep.min[0], rep.min[1], rep.max[0], rep.max[1], rep.truncation, yes(rep.pass)});
      r.checks.push_back(check_line("perturbed wave " + name + "-solution, eps = " + fmt(eps), rep.pass));
      r.pass = r.pass && rep.pass;
    }
  }
  r.metrics = {{"mu", mu}, {"decay_exponents", lambdas_json(l)}, {"front", front}, {"wave_speed", rec.speed},
               {"h", rec.h}, {"dt", rec.dt}, {"tol", tol}};

  if (check_a2(sys).holds && !sys.autonomous()) {
    const auto w = uniform_super_solution(sys, num(s, "uniform_eps", 1.0));
    const auto u = check_uniform_super_solution(model, w, num(s, "uniform_periods", 3.0) * sys.T,
                                                static_cast<int>(num(s, "uniform_samples", 30000)),
                                                num(s, "uniform_tol", 1e-6));
    r.metrics["uniform_super_solution"] = {{"C1", w.C1}, {"C2", w.C2}, {"gamma0", w.gamma0},
                                           {"theta_plus", w.theta_plus}, {"gamma_plus", w.gamma_plus},
                                           {"min_residual", {u.min_residual[0], u.min_residual[1]}},
                                           {"min_rate", {u.min_rate[0], u.min_rate[1]}}, {"strict", u.strict}};
    r.checks.push_back(check_line("uniform super-solution strictly positive", u.strict));
    r.pass = r.pass && u.strict;
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(field));
  return r;
}

// ---------------------------------------------------------------- dispatch

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"check-assumptions", "logistic",      "kinetics",     "simulate",
                                             "speed",             "limits-small",  "limits-large", "sign-criteria",
                                             "sign-change",       "residuals"};
  return v;
}

RunResult run_verb(const std::string& verb, const Json& config) {
  if (verb == "check-assumptions") return run_check_assumptions(config);
  if (verb == "logistic") return run_logistic(config);
  if (verb == "kinetics") return run_kinetics_report(config);
  if (verb == "simulate") return run_simulate(config);
  if (verb == "speed") return run_speed(config);
  if (verb == "limits-small") return run_limits_small(config);
  if (verb == "limits-large") return run_limits_large(config);
  if (verb == "sign-criteria") return run_sign_criteria(config);
  if (verb == "sign-change") return run_sign_change(config);
  if (verb == "residuals") return run_residuals(config);
  throw ConfigError("unknown verb " + verb);
}

}  // namespace lvwave
