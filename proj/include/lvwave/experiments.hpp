#pragma once

#include "lvwave/report.hpp"
#include "lvwave/wavespeed.hpp"

#include <string>
#include <vector>

namespace lvwave {

/// Each runner takes a resolved config (command-line overrides already applied) and returns
/// the tables, metrics and pass flag of one verb. Solver failures propagate as exceptions; the
/// command line maps them to exit code 3.

/// (A1), (A2), the stability condition on 0 and 1, and pointwise bistability margins.
RunResult run_check_assumptions(const Json& config);

/// Periodic logistic states: closed form against the ODE oracle and the small/large period limits.
RunResult run_logistic(const Json& config);

/// Coexistence fixed points, Floquet exponents, stability of 0 and 1, frozen separatrices.
RunResult run_kinetics_report(const Json& config);

/// Plain PDE run: front positions per period and profile snapshots.
RunResult run_simulate(const Json& config);

/// Wave speeds of the periodic, frozen and homogenized systems, plus the mean frozen speed.
RunResult run_speed(const Json& config);

/// |c_T - c0| along decreasing small periods: strictly decreasing and |c_T - c0| / T in a band.
RunResult run_limits_small(const Json& config);

/// T |c_T - c*| along increasing large periods, within a band.
RunResult run_limits_large(const Json& config);

/// Dominance-based sign predictions against measured speeds, with the mirrored systems.
RunResult run_sign_criteria(const Json& config);

/// Opposite-sign limits c0 and c* and measured speeds with the same signs at a small and a
/// large period.
RunResult run_sign_change(const Json& config);

/// Residual checks: converged wave, perturbed-wave super/sub pairs, uniform super-solution.
RunResult run_residuals(const Json& config);

/// Dispatch by verb name; ConfigError for unknown verbs.
RunResult run_verb(const std::string& verb, const Json& config);
const std::vector<std::string>& verbs();

/// Sign prediction from pointwise dominance (requires d1 = d2 and a1 = a2).
enum class SignPrediction { positive, negative, nonnegative, nonpositive, zero, none };
std::string to_string(SignPrediction p);
SignPrediction predict_sign(const SystemConfig& sys);
/// True when d1 = d2 and a1 = a2 on the sample set.
bool equal_diffusion_and_crowding(const SystemConfig& sys);

/// Band of a positive column: max / min (infinity when some entry is zero).
double band_ratio(const std::vector<double>& values);

}  // namespace lvwave
