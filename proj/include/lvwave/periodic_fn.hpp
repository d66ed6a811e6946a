#pragma once

#include "lvwave/quadrature.hpp"

#include <vector>

namespace lvwave {

enum class Family { constant, trigonometric, mollified_step };

const char* to_string(Family family);

/// Positive 1-periodic C2 coefficient from a small set of parametric families.
///
/// trigonometric: mean + sum_k cos_k cos(2 pi k s) + sin_k sin(2 pi k s).
/// mollified_step: plateau values[j] on (centers[j], centers[j+1]) cyclically, joined by a
/// quintic smoothstep of half-width delta around each center. delta = 0 is the sharp step,
/// accepted for quadrature and exact formulas; it is not C2.
class PeriodicFn {
 public:
  PeriodicFn() : PeriodicFn(constant(1.0)) {}

  static PeriodicFn constant(double value);
  static PeriodicFn trigonometric(double mean, std::vector<double> cos_coeffs,
                                  std::vector<double> sin_coeffs);
  static PeriodicFn mollified_step(std::vector<double> values, std::vector<double> centers,
                                   double half_width);

  double operator()(double s) const { return eval(s, 0); }
  double d1(double s) const { return eval(s, 1); }
  double d2(double s) const { return eval(s, 2); }

  double mean() const { return mean_; }
  double min() const { return min_; }
  double max() const { return max_; }
  Family family() const { return family_; }
  bool is_constant() const { return family_ == Family::constant; }

  /// offset + scale * f, in the same family.
  PeriodicFn affine(double offset, double scale) const;

  /// Points of [0, 1] (including both ends) between which the function is polynomial or analytic.
  std::vector<double> breakpoints() const;
  /// Points where sampling must look (transition midpoints); empty for smooth families.
  std::vector<double> special_points() const;

  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& centers() const { return centers_; }
  double half_width() const { return delta_; }
  double offset() const { return c0_; }

 private:
  PeriodicFn(Family family) : family_(family) {}
  double eval(double s, int order) const;
  void finish();

  Family family_;
  double c0_ = 0.0;
  std::vector<double> a_, b_;
  std::vector<double> values_, centers_;
  double delta_ = 0.0;
  double mean_ = 0.0, min_ = 0.0, max_ = 0.0;
};

/// Period-mean by composite Gauss-Legendre, split at the family's breakpoints.
double mean(const PeriodicFn& f);

/// Period-mean of a pointwise expression of several coefficient functions.
template <typename F>
double mean_of(F&& f, const std::vector<double>& breaks) {
  return integrate_pieces(f, std::span<const double>(breaks), 4, 16);
}

/// Quintic smoothstep x^3 (10 - 15 x + 6 x^2) and its derivatives, clamped outside [0, 1].
double smoothstep(double x, int order = 0);

}  // namespace lvwave
