#include "lvwave/wavespeed.hpp"

#include "lvwave/parallel.hpp"
#include "lvwave/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace lvwave {

RunPlan default_run_plan(const SystemConfig& sys) {
  if (sys.autonomous()) return {40, 80, 1};
  const double T = sys.T;
  RunPlan plan;
  plan.stride = T >= 1.0 ? 1 : static_cast<int>(std::ceil(1.0 / T - 1e-9));
  plan.discard_periods = std::max<long>(5, static_cast<long>(std::ceil(40.0 / T - 1e-9)));
  plan.discard_periods = (plan.discard_periods + plan.stride - 1) / plan.stride * plan.stride;
  plan.run_periods = plan.discard_periods + 30L * plan.stride;
  return plan;
}

double front_position(const WaveField& field) { return front_crossing(field) + field.shift; }

SpeedEstimate fit_speed(std::vector<double> times, std::vector<double> positions, std::size_t first) {
  SpeedEstimate est;
  const std::size_t n = times.size() - std::min(first, times.size());
  if (times.size() != positions.size() || n < 3)
    throw DomainError("speed fit needs at least three post-transient samples");
  double mt = 0.0, mx = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    mt += times[i];
    mx += positions[i];
  }
  mt /= n;
  mx /= n;
  double stt = 0.0, stx = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    stt += (times[i] - mt) * (times[i] - mt);
    stx += (times[i] - mt) * (positions[i] - mx);
  }
  const double slope = stx / stt;
  double ssr = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    const double r = positions[i] - (mx + slope * (times[i] - mt));
    ssr += r * r;
  }
  est.speed = slope;
  est.residual_rms = std::sqrt(ssr / n);
  est.ci = 2.0 * std::sqrt(ssr / (n - 2) / stt);
  est.times = std::move(times);
  est.positions = std::move(positions);
  est.first_fit = first;
  return est;
}

SpeedEstimate measure_speed(const SystemConfig& sys, const SpeedOptions& opts) {
  const KineticModel model(sys);
  return measure_speed(model, opts);
}

SpeedEstimate measure_speed(const KineticModel& model, const SpeedOptions& opts) {
  const SystemConfig& sys = model.system();
  const bool autonomous = sys.autonomous();
  // Autonomous systems are sampled every unit of time regardless of the nominal period.
  const double P = autonomous ? 1.0 : sys.T;
  const int m = opts.steps_per_period > 0 ? opts.steps_per_period : default_steps_per_period(sys);
  const RunPlan def = default_run_plan(sys);
  RunPlan plan{opts.discard_periods > 0 ? opts.discard_periods : def.discard_periods,
               opts.run_periods > 0 ? opts.run_periods : def.run_periods,
               opts.stride > 0 ? opts.stride : def.stride};
  if (opts.discard_periods > 0 && opts.run_periods == 0)
    plan.run_periods = plan.discard_periods + 30L * plan.stride;
  if (plan.run_periods < plan.discard_periods + 10 ||
      (plan.run_periods - plan.discard_periods) / plan.stride < 10)
    throw DomainError("run must cover at least ten post-transient samples");

  const double dt = P / m;
  const int chunk = std::max(1, std::min(m, static_cast<int>(std::ceil(1.0 / dt))));
  DenormalGuard guard;
  WaveField field = initialize_front(opts.grid, opts.init_width, opts.init_center);
  ImexStepper stepper(model, dt);
  std::vector<double> times{0.0}, positions{front_position(field)};
  std::size_t first = plan.discard_periods == 0 ? 0 : std::string::npos;
  for (long p = 1; p <= plan.run_periods; ++p) {
    for (int done = 0; done < m; done += chunk) {
      stepper.advance(field, std::min(chunk, m - done));
      recenter(field);
    }
    // Exact stroboscopic time; accumulating dt would drift by rounding.
    field.t = p * P;
    if (p % plan.stride == 0) {
      if (first == std::string::npos && p >= plan.discard_periods) first = times.size();
      times.push_back(p * P);
      positions.push_back(front_position(field));
    }
  }
  SpeedEstimate est = fit_speed(std::move(times), std::move(positions), first);
  est.discard_periods = plan.discard_periods;
  est.run_periods = plan.run_periods;
  est.stride = plan.stride;
  est.T = P;
  est.h = field.h;
  est.dt = dt;
  est.converged = est.residual_rms <= speed_residual_limit(field.h);
  if (!est.converged && opts.strict)
    throw UnconvergedSpeed("front residual " + std::to_string(est.residual_rms) + " exceeds " +
                               std::to_string(speed_residual_limit(field.h)),
                           est);
  return est;
}

double exact_speed(double r2) {
  if (!(r2 > 3.0)) throw DomainError("explicit speed needs r2 > 3");
  return (2.0 - r2 / 3.0) / std::sqrt(2.0 * r2 / 3.0);
}

bool matches_step_family(const SystemConfig& sys) {
  std::vector<double> s = assumption_samples(sys, 64);
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  for (double x : s) {
    if (!near(sys.d1(x), 1.0) || !near(sys.d2(x), 1.0) || !near(sys.a1(x), 1.0) ||
        !near(sys.a2(x), 1.0) || !near(sys.r1(x), 1.0) || !near(sys.k1(x), 1.0 / 3.0) ||
        !near(sys.k2(x), 2.0 + 4.0 / 3.0 * sys.r2(x)))
      return false;
  }
  return true;
}

HomogenizedSpeed homogenized_speed(const SystemConfig& sys, const SpeedOptions& opts) {
  if (!check_a1(sys).holds) throw DomainError("homogenized wave needs (A1)");
  HomogenizedSpeed out;
  out.estimate = measure_speed(sys.homogenized(), opts);
  if (matches_step_family(sys)) out.closed_form = exact_speed(sys.r2.mean());
  return out;
}

namespace {

// Gauss-Legendre nodes and weights over each nondegenerate piece between breakpoints.
void piecewise_nodes(const std::vector<double>& breaks, int n, std::vector<double>& s,
                     std::vector<double>& w) {
  s.clear();
  w.clear();
  const GaussRule& rule = gauss_legendre(n);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (b - a <= 1e-14) continue;
    for (int i = 0; i < n; ++i) {
      s.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
      w.push_back(0.5 * (b - a) * rule.weights[i]);
    }
  }
}

}  // namespace

MeanFrozenSpeed mean_frozen_speed(const SystemConfig& sys, const MeanSpeedOptions& opts) {
  if (!check_a2(sys).holds) throw DomainError("frozen waves need (A2) on [0, 1]");
  std::vector<double> breaks = sys.breakpoints();
  std::sort(breaks.begin(), breaks.end());
  MeanFrozenSpeed out;
  const auto sum = [](const MeanFrozenSpeed& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.s.size(); ++i) v += m.weights[i] * m.speed[i];
    return v;
  };

  if (opts.allow_exact && matches_step_family(sys)) {
    out.exact = true;
    double previous = 0.0;
    for (int n = opts.nodes_per_piece;; n *= 2) {
      piecewise_nodes(breaks, n, out.s, out.weights);
      out.speed.resize(out.s.size());
      for (std::size_t i = 0; i < out.s.size(); ++i) out.speed[i] = exact_speed(sys.r2(out.s[i]));
      out.nodes_per_piece = n;
      out.value = sum(out);
      if ((n > opts.nodes_per_piece && std::abs(out.value - previous) < opts.refine_tol) ||
          2 * n > opts.max_nodes_per_piece)
        return out;
      previous = out.value;
    }
  }

  piecewise_nodes(breaks, opts.nodes_per_piece, out.s, out.weights);
  out.nodes_per_piece = opts.nodes_per_piece;
  out.speed.assign(out.s.size(), 0.0);
  parallel_for(out.s.size(), opts.threads, [&](std::size_t i) {
    try {
      out.speed[i] = measure_speed(sys.frozen(out.s[i]), opts.pde).speed;
    } catch (const Error& e) {
      throw ConvergenceError("frozen speed failed at s = " + std::to_string(out.s[i]) + ": " + e.what());
    }
  });
  out.value = sum(out);
  return out;
}

std::string to_string(SpeedSign sign) {
  switch (sign) {
    case SpeedSign::positive: return "positive";
    case SpeedSign::negative: return "negative";
    case SpeedSign::zero: return "zero";
    case SpeedSign::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

SpeedSign sign_classify(double speed, double ci, double tol) {
  const double lo = speed - ci, hi = speed + ci;
  if (lo > tol) return SpeedSign::positive;
  if (hi < -tol) return SpeedSign::negative;
  if (lo >= -tol && hi <= tol) return SpeedSign::zero;
  return SpeedSign::indeterminate;
}

SpeedSign sign_classify(const SpeedEstimate& estimate, double tol) {
  return sign_classify(estimate.speed, estimate.ci, tol);
}

}  // namespace lvwave
