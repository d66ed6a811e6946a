// Acceptance run: one PASS/FAIL line per criterion, informational lines marked "info".
// Usage: acceptance <repo root>. Exit status 1 when any criterion fails.

#include "lvwave/comparison.hpp"
#include "lvwave/errors.hpp"
#include "lvwave/experiments.hpp"
#include "lvwave/kinetics.hpp"
#include "lvwave/pde.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace lvwave;
namespace fs = std::filesystem;

namespace {

fs::path root;
int failures = 0;

Json config(const std::string& name) { return load_config(root / "configs" / name); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

void criterion(int n, const std::function<void(Outcome&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "[exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s(%.1f s)\n", n, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

void info(const std::string& text) {
  std::printf("      info: %s\n", text.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.7g", v);
  return buf;
}

std::string table_column(const RunResult& r, const std::string& table, const std::string& column) {
  for (const auto& t : r.tables) {
    if (t.name != table) continue;
    std::size_t c = 0;
    while (c < t.columns.size() && t.columns[c] != column) ++c;
    std::string out;
    for (const auto& row : t.rows) {
      if (!out.empty()) out += ", ";
      if (const double* d = std::get_if<double>(&row[c])) out += g(*d);
    }
    return out;
  }
  return "";
}

// Runner-backed criterion: every check line of the runner must pass.
void require_run(Outcome& o, const RunResult& r) {
  for (const auto& line : r.checks)
    if (line.size() < 6 || line.substr(line.size() - 4) != "pass") o.require(false, line);
  o.require(r.pass, r.verb + " pass flag");
}

// ---------------------------------------------------------------- property helpers

Eigen::ArrayXd smooth_noise(const WaveField& f, std::mt19937& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(f.v1.size());
  for (int b = 0; b < 4; ++b) {
    const double c = 0.8 * f.L * u(rng), w = 2.0 + 1.5 * (1.0 + u(rng)), a = amplitude * u(rng);
    for (int j = 0; j <= f.cells(); ++j) out[j] += a * std::exp(-std::pow((f.x(j) - c) / w, 2));
  }
  return out;
}

double sup_on_coarse(const WaveField& coarse, const WaveField& fine) {
  const int r = fine.cells() / coarse.cells();
  double m = 0.0;
  for (int j = 0; j <= coarse.cells(); ++j)
    m = std::max({m, std::abs(coarse.v1[j] - fine.v1[r * j]), std::abs(coarse.v2[j] - fine.v2[r * j])});
  return m;
}

std::pair<double, double> tail_fit(const WaveField& f, double x0, double x1) {
  const double xf = front_crossing(f);
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int j = 0; j <= f.cells(); ++j) {
    const double x = f.x(j) - xf;
    if (x < x0 || x > x1) continue;
    const double y = std::log(f.v1[j]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cxy = sxy - sx * sy / n, cxx = sxx - sx * sx / n, cyy = syy - sy * sy / n;
  return {cxy / cxx, cxy / std::sqrt(cxx * cyy)};
}

template <class F>
double dense_max(F&& f, double a, double b, int n) {
  double m = -INFINITY;
  for (int k = 0; k <= n; ++k) m = std::max(m, f(a + (b - a) * k / n));
  return m;
}

SystemConfig trig_system(double T) {
  const auto one = PeriodicFn::constant(1.0);
  return {one,
          PeriodicFn::constant(1.3),
          PeriodicFn::trigonometric(1.2, {}, {0.3}),
          PeriodicFn::trigonometric(1.0, {0.2}, {}),
          one,
          PeriodicFn::trigonometric(1.0, {}, {0.1}),
          PeriodicFn::constant(1.8),
          PeriodicFn::trigonometric(2.0, {0.3}, {0.2}),
          T};
}

}  // namespace

int main(int argc, char** argv) {
  root = argc > 1 ? fs::path(argv[1]) : fs::current_path();
  const SystemConfig family = system_from(config("common/step_competition.json"));
  const double c0_formula = -std::sqrt(38.0) / 114.0;
  const double cstar_formula = 5.0 * std::sqrt(21.0) / 63.0 - std::sqrt(2.0) / 6.0;
  std::printf("orientation: species 1 on the left, c > 0 when species 1 invades (quoted magnitudes, "
              "mirrored signs)\n");

  criterion(1, [&](Outcome& o) {
    const RunSettings rs = settings_from(config("speed_frozen.json"));
    o.require(std::abs(rs.grid.h() - 0.05) < 1e-12 && rs.grid.L == 150.0, "grid h = 0.05, L = 150");
    const double refs[2] = {5.0 * std::sqrt(21.0) / 42.0, -std::sqrt(2.0) / 2.0};
    const double s_values[2] = {0.3, 0.9};
    for (int k = 0; k < 2; ++k) {
      const SystemConfig frozen = family.frozen(s_values[k]);
      o.require(std::abs(exact_speed(frozen.r2(0.0)) - refs[k]) < 1e-14, "closed form");
      SpeedOptions opts;
      opts.grid = rs.grid;
      const auto t0 = std::chrono::steady_clock::now();
      const SpeedEstimate e = measure_speed(frozen, opts);
      const double secs = seconds_since(t0);
      const std::size_t samples = e.times.size() - e.first_fit;
      o.detail << "r2 = " << g(frozen.r2(0.0)) << ": c = " << g(e.speed) << " vs " << g(refs[k]) << " in "
               << g(secs) << " s, " << samples << " samples; ";
      o.require(std::abs(e.speed - refs[k]) <= 0.02, "within 0.02");
      o.require(samples >= 30, ">= 30 samples");
      o.require(secs <= 120.0, "<= 2 min");
    }
  });

  criterion(2, [&](Outcome& o) {
    const double closed = exact_speed(family.r2.mean());
    o.require(std::abs(family.r2.mean() - 19.0 / 3.0) < 1e-12, "mean r2 = 19/3");
    o.require(std::abs(closed - c0_formula) <= 1e-12, "closed form to 1e-12");
    SpeedOptions opts;
    opts.grid = settings_from(config("speed_frozen.json")).grid;
    const HomogenizedSpeed h = homogenized_speed(family, opts);
    o.require(h.closed_form.has_value() && std::abs(*h.closed_form - closed) < 1e-15, "closed form attached");
    o.detail << "c0 = " << g(closed) << " (formula " << g(c0_formula) << "), PDE " << g(h.estimate.speed) << "; ";
    o.require(std::abs(h.estimate.speed - closed) <= 0.02, "PDE within 0.02");
  });

  criterion(3, [&](Outcome& o) {
    const MeanFrozenSpeed sharp = mean_frozen_speed(step_competition_family(0.0));
    const MeanFrozenSpeed moll = mean_frozen_speed(family, {.refine_tol = 1e-12});
    o.detail << "sharp c* = " << g(sharp.value) << " (formula " << g(cstar_formula) << ", error "
             << g(std::abs(sharp.value - cstar_formula)) << "), mollified c* = " << g(moll.value) << " (gap "
             << g(std::abs(moll.value - cstar_formula)) << "); ";
    o.require(sharp.exact && std::abs(sharp.value - cstar_formula) <= 1e-10, "sharp to 1e-10");
    o.require(std::abs(moll.value - cstar_formula) <= 5e-3, "mollified within 5e-3 of the sharp value");
  });

  criterion(4, [&](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run_sign_change(config("sign_change.json"));
    const double secs = seconds_since(t0);
    require_run(o, r);
    o.detail << "c0 = " << g(r.metrics["c0"]) << ", c* = " << g(r.metrics["c_star"]) << ", c(0.05) = "
             << g(r.metrics["small"]["speed"]) << " +- " << g(r.metrics["small"]["ci"]) << " "
             << r.metrics["small"]["sign"].get<std::string>() << ", c(50) = " << g(r.metrics["large"]["speed"])
             << " +- " << g(r.metrics["large"]["ci"]) << " " << r.metrics["large"]["sign"].get<std::string>()
             << "; ";
    // Signs mirror the usually quoted pair: negative at small T, positive at large T in this orientation.
    o.require(r.metrics["small"]["sign"] == "negative" && r.metrics["large"]["sign"] == "positive",
              "negative at T = 0.05 and positive at T = 50");
    o.require(secs <= 900.0, "<= 15 min");
  });

  criterion(5, [&](Outcome& o) {
    const RunResult r = run_limits_small(config("limits_small.json"));
    require_run(o, r);
    o.detail << "generic config: |c_T - c0| = " << table_column(r, "limits_small", "deviation")
             << "; scaled = " << table_column(r, "limits_small", "deviation_over_T") << "; band "
             << g(r.metrics["band"]) << "; ";
  });
  try {
    const RunResult r = run_limits_small(config("limits_small_step.json"));
    info("two-plateau family: |c_T - c0| = " + table_column(r, "limits_small", "deviation") + "; band " +
         g(r.metrics["band"]) + " (O(T^2) on this family)");
  } catch (const std::exception& e) {
    info(std::string("two-plateau small-period sweep: ") + e.what());
  }

  criterion(6, [&](Outcome& o) {
    const RunResult r = run_limits_large(config("limits_large.json"));
    require_run(o, r);
    o.detail << "T |c_T - c*| = " << table_column(r, "limits_large", "T_times_deviation") << "; band "
             << g(r.metrics["band"]) << "; ";
  });

  criterion(7, [&](Outcome& o) {
    const RunResult r = run_logistic(config("logistic.json"));
    require_run(o, r);
    o.detail << "oracle diff " << g(r.metrics["oracle_sup_diff"]) << ", large bands " << g(r.metrics["p1_large_band"])
             << " / " << g(r.metrics["p2_large_band"]) << "; ";
  });
  try {
    const RunResult r = run_logistic(config("logistic_step.json"));
    info(std::string("two-plateau logistic states: ") + (r.pass ? "pass" : "fail") + ", large bands " +
         g(r.metrics["p1_large_band"]) + " / " + g(r.metrics["p2_large_band"]));
  } catch (const std::exception& e) {
    info(std::string("two-plateau logistic states: ") + e.what());
  }

  criterion(8, [&](Outcome& o) {
    const Json c = config("kinetics.json");
    const RunResult r = run_kinetics_report(c);
    require_run(o, r);
    for (const auto& p : r.metrics["periods"])
      o.detail << "T = " << g(p["T"]) << ": lambda_T = " << g(p["lambda_T"]) << "; ";
    // Nearness to the seeds: averaged saddle for short periods, frozen saddles along long ones.
    const Vec2 avg = frozen_equilibria(family.homogenized(), 0.0).saddle;
    const auto short_orbit = find_interior_fixed_point(KineticModel(family.with_period(0.05)), avg);
    double d_short = 0.0;
    for (const Vec2& v : short_orbit.v) d_short = std::max(d_short, (v - avg).norm());
    const auto long_orbit = find_interior_fixed_point(KineticModel(family.with_period(50.0)), avg);
    double d_long = 0.0;
    for (double s : {0.3, 0.9}) {
      const Vec2 saddle = frozen_equilibria(family, s).saddle;
      std::size_t k = 0;
      while (k + 1 < long_orbit.t.size() && long_orbit.t[k] < s * 50.0) ++k;
      d_long = std::max(d_long, (long_orbit.v[k] - saddle).norm());
    }
    o.detail << "max distance to averaged saddle " << g(d_short) << " (T = 0.05), to frozen saddles "
             << g(d_long) << " (T = 50); ";
    o.require(d_short <= 0.05 && d_long <= 0.05, "fixed points near their seeds");
  });

  criterion(9, [&](Outcome& o) {
    const RunResult r = run_sign_criteria(config("sign_criteria.json"));
    require_run(o, r);
    for (const auto& c : r.metrics["cases"])
      o.detail << c["name"].get<std::string>() << " " << g(c["speed"]) << " (" << c["classification"].get<std::string>()
               << ", mirror " << g(c["mirror"]["speed"]) << "); ";
  });

  criterion(10, [&](Outcome& o) {
    // Eigenfunction ODE residuals by fourth-order differences.
    const auto model = std::make_shared<const KineticModel>(trig_system(3.0));
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
      for (bool plus : {false, true}) {
        const EigenPair psi(model, i, plus);
        const double h = 1e-3;
        for (int k = 0; k <= 600; ++k) {
          const double t = 3.0 * k / 600;
          const double fd = (-psi(t + 2 * h) + 8 * psi(t + h) - 8 * psi(t - h) + psi(t - 2 * h)) / (12 * h);
          const Rates c = model->rates(t);
          const double slope = i == 0 ? (plus ? -c.A1 : c.A1 - c.K1) : (plus ? c.A2 - c.K2 : -c.A2);
          worst = std::max(worst, std::abs(fd - (slope + psi.lambda()) * psi(t)));
        }
      }
    o.detail << "eigen residual " << g(worst) << "; ";
    o.require(worst <= 1e-8, "eigenfunction residuals <= 1e-8");
    // Normalization identities.
    double norm_err = 0.0;
    for (const SystemConfig& sys : {trig_system(3.0), family.with_period(5.0)}) {
      const KineticModel m(sys);
      const double mu = choose_mu(lambdas(m));
      const EigenSystem es = normalized_eigenfunctions(m, mu);
      const int n = 400000;
      const double T = sys.T;
      norm_err = std::max(norm_err, std::abs(dense_max([&](double t) { return es.plus[0](t); }, 0, T, n) - 1.0));
      norm_err = std::max(norm_err, std::abs(dense_max([&](double t) { return es.minus[1](t); }, 0, T, n) - 1.0));
      norm_err = std::max(norm_err, std::abs(dense_max([&](double t) { return m.rates(t).K1 * es.plus[1](t) /
                                                                              es.plus[0](t); }, 0, T, n) - mu / 4));
      norm_err = std::max(norm_err, std::abs(dense_max([&](double t) { return m.rates(t).K2 * es.minus[0](t) /
                                                                              es.minus[1](t); }, 0, T, n) - mu / 4));
    }
    o.detail << "normalization " << g(norm_err) << "; ";
    o.require(norm_err <= 1e-8, "normalization identities to 1e-8");
    // Explicit long-period super-solution, relative tolerance 1e-6.
    const SystemConfig long_sys = family.with_period(50.0);
    const auto w = uniform_super_solution(long_sys, 1.0);
    const auto u = check_uniform_super_solution(KineticModel(long_sys), w, 150.0, 30000, 1e-6);
    o.detail << "super-solution min rate " << g(std::min(u.min_rate[0], u.min_rate[1])) << "; ";
    o.require(u.strict, "uniform super-solution strictly positive");
    // Residual checker on a converged wave plus perturbed pairs.
    const RunResult r = run_residuals(config("residuals.json"));
    require_run(o, r);
    o.detail << "wave residual " << table_column(r, "residuals", "max_L1").substr(0, 12) << "; ";
  });

  criterion(11, [&](Outcome& o) {
    // Poincare monotonicity on 200 ordered pairs.
    {
      const KineticModel model(trig_system(2.0));
      std::mt19937 rng(11);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      bool ok = true;
      for (int k = 0; k < 200; ++k) {
        const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
        const Vec2 qa = poincare_map(model, a.cwiseMin(b), 1024).value, qb = poincare_map(model, a.cwiseMax(b), 1024).value;
        ok = ok && qa[0] <= qb[0] + 1e-10 && qa[1] <= qb[1] + 1e-10;
      }
      o.require(ok, "Poincare monotonicity");
    }
    const KineticModel model(family);
    // Comparison preservation on 20 pairs.
    {
      const Grid grid{40.0, 800};
      std::mt19937 rng(9);
      double worst = -INFINITY;
      for (int pair = 0; pair < 20; ++pair) {
        WaveField hi = initialize_front(grid, 4.0, 3.0);
        hi.v1 = (hi.v1 + smooth_noise(hi, rng, 0.2)).max(0.0).min(1.0);
        hi.v2 = (hi.v2 + smooth_noise(hi, rng, 0.2)).max(0.0).min(1.0);
        WaveField lo = hi;
        lo.v1 = (hi.v1 - smooth_noise(hi, rng, 0.3).abs()).max(0.0);
        lo.v2 = (hi.v2 - smooth_noise(hi, rng, 0.3).abs()).max(0.0);
        lo.v1[0] = lo.v2[0] = 1.0;
        ImexStepper a(model, 1.0 / 1024), b(model, 1.0 / 1024);
        for (int period = 0; period < 3; ++period) {
          a.advance(lo, 1024);
          b.advance(hi, 1024);
          worst = std::max({worst, (lo.v1 - hi.v1).maxCoeff(), (lo.v2 - hi.v2).maxCoeff()});
        }
      }
      o.detail << "comparison max(lo - hi) " << g(worst) << "; ";
      o.require(worst <= 1e-8, "comparison preservation");
    }
    // Equilibrium preservation per step.
    {
      const Grid grid{30.0, 600};
      double worst = 0.0;
      for (const auto& e : {std::pair{0.0, 0.0}, std::pair{1.0, 1.0}, std::pair{0.0, 1.0}}) {
        WaveField f = initialize_front(grid);
        f.v1.setConstant(e.first);
        f.v2.setConstant(e.second);
        ImexStepper stepper(model, 0.01);
        for (int k = 0; k < 20; ++k) {
          const Eigen::ArrayXd a = f.v1, b = f.v2;
          stepper.step(f);
          const int lo = grid.N / 4, n = grid.N / 2;
          worst = std::max({worst, (f.v1.segment(lo, n) - a.segment(lo, n)).abs().maxCoeff(),
                            (f.v2.segment(lo, n) - b.segment(lo, n)).abs().maxCoeff()});
        }
      }
      o.detail << "equilibrium drift " << g(worst) << "/step; ";
      o.require(worst <= 1e-12, "equilibrium preservation");
    }
    // Order interval [0, 1] invariance.
    {
      const Grid grid{40.0, 800};
      std::mt19937 rng(5);
      double lo = INFINITY, hi = -INFINITY;
      for (int trial = 0; trial < 5; ++trial) {
        WaveField f = initialize_front(grid);
        f.v1 = (f.v1 + smooth_noise(f, rng, 0.4)).max(0.0).min(1.0);
        f.v2 = (f.v2 + smooth_noise(f, rng, 0.4)).max(0.0).min(1.0);
        ImexStepper stepper(model, 1.0 / 1024);
        for (int k = 0; k < 2048; ++k) {
          stepper.step(f);
          lo = std::min({lo, f.v1.minCoeff(), f.v2.minCoeff()});
          hi = std::max({hi, f.v1.maxCoeff(), f.v2.maxCoeff()});
        }
      }
      o.require(lo >= -1e-9 && hi <= 1.0 + 1e-9, "order interval invariance");
    }
    // Second-order self-convergence.
    const KineticModel frozen(family.frozen(0.9));
    {
      std::vector<WaveField> runs;
      for (int level = 0; level < 3; ++level) {
        const int scale = 1 << level;
        const double dt = 0.04 / scale;
        WaveField f = initialize_front(Grid{30.0, 150 * scale});
        ImexStepper(frozen, dt).advance(f, std::lround(10.0 / dt));
        runs.push_back(f);
      }
      const double order = std::log2(sup_on_coarse(runs[0], runs[1]) / sup_on_coarse(runs[1], runs[2]));
      o.detail << "observed order " << g(order) << "; ";
      o.require(order >= 1.8, "observed order >= 1.8");
    }
    // Tail log-linearity with a grid-stable slope.
    {
      double slopes[2], corr_worst = -1.0;
      for (int level = 0; level < 2; ++level) {
        WaveField f = initialize_front(Grid{60.0, 600 << level}, 2.0);
        ImexStepper stepper(frozen, 0.01 / (1 << level));
        for (int unit = 0; unit < 40; ++unit) {
          stepper.advance(f, 100 << level);
          recenter(f);
        }
        const auto [slope, corr] = tail_fit(f, 4.0, 14.0);
        slopes[level] = slope;
        corr_worst = std::max(corr_worst, corr);
      }
      const double rel = std::abs(slopes[0] - slopes[1]) / std::abs(slopes[1]);
      o.detail << "tail slope " << g(slopes[1]) << " (change " << g(rel) << ", corr " << g(corr_worst) << "); ";
      o.require(slopes[1] < 0.0 && corr_worst < -0.9999 && rel <= 0.1, "tail log-linearity");
    }
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
