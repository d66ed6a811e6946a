#pragma once

#include "lvwave/periodic_fn.hpp"
#include "lvwave/system.hpp"

#include <vector>

namespace lvwave {

/// Samples of a positive T-periodic solution on m+1 equispaced times over [0, T], with
/// slopes for cubic Hermite interpolation. Evaluation wraps t into [0, T).
class PeriodicState {
 public:
  PeriodicState() = default;
  PeriodicState(double T, std::vector<double> values, std::vector<double> slopes, int species = 1);

  double operator()(double t) const;
  double slope(double t) const;

  double T() const { return T_; }
  int intervals() const { return static_cast<int>(values_.size()) - 1; }
  double time(int k) const { return T_ * k / intervals(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }
  int species() const { return species_; }
  double min() const;
  double max() const;
  bool is_constant() const { return constant_; }

 private:
  double T_ = 1.0;
  std::vector<double> values_, slopes_;
  int species_ = 1;
  bool constant_ = false;
};

/// Log-space evaluation of the explicit periodic logistic solution; valid for any T.
PeriodicState periodic_logistic_closed_form(const PeriodicFn& r, const PeriodicFn& a, double T,
                                            int m = 2048, int species = 1);

/// Independent oracle: Newton on the time-T map (variational derivative) plus RK4 sampling.
PeriodicState periodic_logistic_ode(const PeriodicFn& r, const PeriodicFn& a, double T, int m = 2048,
                                    int species = 1);

/// Semi-trivial states of a system (closed form).
struct SemiTrivialStates {
  PeriodicState p1, p2;
};
SemiTrivialStates semi_trivial_states(const SystemConfig& sys, int m = 2048);

/// (1/T) times the integral over a period of r - a p; zero for the exact periodic solution.
double logistic_mean_defect(const PeriodicFn& r, const PeriodicFn& a, const PeriodicState& p);

struct LimitRow {
  double T = 0.0;
  double deviation = 0.0;
  /// deviation / T for the small-period regime, deviation * T for the large-period regime.
  double scaled = 0.0;
};

struct LimitTable {
  std::vector<LimitRow> rows;
  bool strictly_decreasing = false;
  /// max/min of the scaled column (1 when every deviation is negligible).
  double band = 1.0;
  bool pass = false;
};

/// sup_s |p_T(sT) - r_bar / a_bar| along a decreasing list of small periods.
LimitTable small_period_limit_check(const PeriodicFn& r, const PeriodicFn& a,
                                    const std::vector<double>& periods, int m = 2048);

/// T sup_s |p_T(sT) - r(s) / a(s)| along an increasing list of large periods.
LimitTable large_period_rate_check(const PeriodicFn& r, const PeriodicFn& a,
                                   const std::vector<double>& periods, int m = 2048);

/// Gauss-Legendre integral over [x0, x1] split at any of the sorted breakpoints inside.
template <typename F>
double integrate_split(F&& f, double x0, double x1, const std::vector<double>& breaks, int n = 8) {
  double sum = 0.0, lo = x0;
  for (double b : breaks) {
    if (b <= x0 || b >= x1) continue;
    sum += integrate(f, lo, b, n);
    lo = b;
  }
  return sum + integrate(f, lo, x1, n);
}

}  // namespace lvwave
