#pragma once

#include "lvwave/errors.hpp"
#include "lvwave/pde.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lvwave {

/// Regression speed with its diagnostics. Positions are absolute (window shift included) and
/// sampled at stroboscopic times.
struct SpeedEstimate {
  double speed = 0.0;
  /// Half-width of the slope confidence interval (two standard errors).
  double ci = 0.0;
  double residual_rms = 0.0;
  std::vector<double> times, positions;
  /// Samples before `first_fit` are transient and excluded from the fit.
  std::size_t first_fit = 0;
  long discard_periods = 0, run_periods = 0;
  int stride = 1;
  double T = 1.0, h = 0.0, dt = 0.0;
  bool converged = false;
};

/// Raised when the residual of an otherwise complete run exceeds the acceptance threshold.
class UnconvergedSpeed : public ConvergenceError {
 public:
  UnconvergedSpeed(const std::string& what, SpeedEstimate partial)
      : ConvergenceError(what), estimate(std::move(partial)) {}
  SpeedEstimate estimate;
};

/// Front tracking settings. Zero values select the defaults described on each field.
struct SpeedOptions {
  Grid grid{};
  /// Steps per period; 0 uses default_steps_per_period.
  int steps_per_period = 0;
  /// Total and transient periods; 0 picks the defaults of default_run_plan.
  long run_periods = 0, discard_periods = 0;
  /// Periods between samples; 0 samples every ceil(1 / T) periods (every period when T >= 1).
  int stride = 0;
  double init_width = 5.0;
  /// Initial front centre (grid-aligned translations for equivariance checks).
  double init_center = 0.0;
  /// When false an over-threshold residual is reported through `converged` instead of thrown.
  bool strict = true;
};

/// Run plan in periods: transient, total and sample stride.
struct RunPlan {
  long discard_periods = 0, run_periods = 0;
  int stride = 1;
};

/// Defaults: autonomous systems sample every unit of time with 40 units of transient and 40
/// sampled units; periodic systems keep the transient at >= 40 time units (>= 5 periods) and
/// collect >= 30 samples spaced by >= 1 time unit.
RunPlan default_run_plan(const SystemConfig& sys);

/// Residual threshold for accepted estimates.
inline double speed_residual_limit(double h) { return 0.05 * h + 1e-6; }

/// Absolute position of the v1 = 1/2 crossing.
double front_position(const WaveField& field);

/// Evolves tanh initial data and fits the stroboscopic front positions.
SpeedEstimate measure_speed(const SystemConfig& sys, const SpeedOptions& opts = {});
SpeedEstimate measure_speed(const KineticModel& model, const SpeedOptions& opts = {});

/// Least-squares slope of positions against times over [first, end), with diagnostics.
SpeedEstimate fit_speed(std::vector<double> times, std::vector<double> positions, std::size_t first);

/// Closed-form speed of the explicit step family at a frozen r2 value, (2 - r/3)(2r/3)^(-1/2).
/// Species 1 sits on the left and a positive speed means species 1 invades. The commonly quoted
/// formula (-2 + r/3)(2r/3)^(-1/2) has the same magnitude and describes the mirrored orientation.
double exact_speed(double r2);

/// True when sys has the shape d = a = r1 = 1, k1 = 1/3, k2 = 2 + (4/3) r2 (checked on samples).
bool matches_step_family(const SystemConfig& sys);

struct HomogenizedSpeed {
  SpeedEstimate estimate;
  std::optional<double> closed_form;
};

/// Speed of the mean-coefficient system; closed form attached for the explicit family.
HomogenizedSpeed homogenized_speed(const SystemConfig& sys, const SpeedOptions& opts = {});

struct MeanSpeedOptions {
  int nodes_per_piece = 16;
  /// Exact path: double the node count until successive values differ by less than this.
  double refine_tol = 1e-3;
  int max_nodes_per_piece = 1024;
  /// Use the closed form when the family matches; false forces front tracking.
  bool allow_exact = true;
  SpeedOptions pde{};
  int threads = 1;
};

struct MeanFrozenSpeed {
  double value = 0.0;
  std::vector<double> s, weights, speed;
  int nodes_per_piece = 0;
  bool exact = false;
};

/// c* = integral over [0, 1] of the frozen speed c(s), Gauss-Legendre per smooth piece.
MeanFrozenSpeed mean_frozen_speed(const SystemConfig& sys, const MeanSpeedOptions& opts = {});

enum class SpeedSign { positive, negative, zero, indeterminate };
std::string to_string(SpeedSign sign);

/// positive when c - ci > tol, negative when c + ci < -tol, zero when the whole interval lies in
/// [-tol, tol], indeterminate otherwise.
SpeedSign sign_classify(const SpeedEstimate& estimate, double tol);
SpeedSign sign_classify(double speed, double ci, double tol);

}  // namespace lvwave
