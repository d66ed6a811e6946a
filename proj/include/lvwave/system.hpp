#pragma once

#include "lvwave/periodic_fn.hpp"

#include <vector>

namespace lvwave {

/// The eight coefficient functions of the competition system and the temporal period T.
/// Coefficients are 1-periodic in rescaled time s = t / T.
struct SystemConfig {
  PeriodicFn d1, d2, r1, r2, a1, a2, k1, k2;
  double T = 1.0;

  /// Throws DomainError unless T > 0.
  void validate() const;

  SystemConfig with_period(double period) const;
  /// Exchanges the roles of the two species.
  SystemConfig swapped() const;
  /// Autonomous system with every coefficient frozen at s (period 1).
  SystemConfig frozen(double s) const;
  /// Autonomous system with every coefficient replaced by its mean (period 1).
  SystemConfig homogenized() const;

  bool autonomous() const;
  /// Union of all coefficient breakpoints in [0, 1].
  std::vector<double> breakpoints() const;
  /// Positive lower and upper bounds over all eight coefficients.
  double theta_minus() const;
  double theta_plus() const;
};

struct A1Report {
  bool holds = false;
  /// r1_bar - k1_bar p2_bar and r2_bar - k2_bar p1_bar with p_bar = r_bar / a_bar; both negative when (A1) holds.
  double margin1 = 0.0, margin2 = 0.0;
};

struct A2Report {
  bool holds = false;
  /// Smallest pointwise margin min_s {k1 p2 - r1, k2 p1 - r2} with p = r / a.
  double min_margin = 0.0;
  double worst_s = 0.0;
  /// min over samples of {k1 p2 - r1, k2 p1 - r2, r1, r2}; gamma0 is 0.9 of this.
  double gamma0_candidate = 0.0;
  double gamma0 = 0.0;
};

struct WangReport {
  bool a2_cond = false, a3_cond = false;
  /// Signed margins, positive when the corresponding inequality holds.
  double a2_margin1 = 0.0, a2_margin2 = 0.0, a3_margin1 = 0.0, a3_margin2 = 0.0;
};

constexpr double strictness = 1e-10;

A1Report check_a1(const SystemConfig& sys);
A2Report check_a2(const SystemConfig& sys, int sample_count = 1024);
WangReport check_wang_conditions(const SystemConfig& sys, int sample_count = 1024);

/// Autonomous system from eight constants.
SystemConfig constant_system(double d1, double d2, double r1, double r2, double a1, double a2,
                             double k1, double k2);

/// Two-plateau family with explicit frozen speeds: d = a = r1 = 1, k1 = 1/3, r2 a mollified
/// step equal to `low` on (0, split] and `high` on (split, 1], and k2 = 2 + (4/3) r2.
SystemConfig step_competition_family(double half_width = 0.02, double T = 1.0, double low = 3.5,
                                     double high = 12.0, double split = 2.0 / 3.0);

/// Uniform samples of [0, 1) plus every coefficient's transition midpoints.
std::vector<double> assumption_samples(const SystemConfig& sys, int sample_count);

}  // namespace lvwave
