#pragma once

#include "lvwave/logistic.hpp"
#include "lvwave/system.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace lvwave {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Coefficients of the cooperative reaction terms at one instant:
/// g1 = A1 (1 - v1) v1 - K1 v1 (1 - v2),  g2 = -A2 (1 - v2) v2 + K2 v1 (1 - v2),
/// with A1 = a1 p1, K1 = k1 p2, A2 = a2 p2, K2 = k2 p1.
struct Rates {
  double A1 = 0.0, K1 = 0.0, A2 = 0.0, K2 = 0.0;
  double d1 = 1.0, d2 = 1.0;
};

/// Reaction terms; V may be a scalar or any Eigen array expression.
template <typename V>
auto reaction1(const Rates& c, const V& v1, const V& v2) {
  return v1 * (c.A1 * (1.0 - v1) - c.K1 * (1.0 - v2));
}
template <typename V>
auto reaction2(const Rates& c, const V& v1, const V& v2) {
  return (1.0 - v2) * (c.K2 * v1 - c.A2 * v2);
}

inline Vec2 reaction(const Rates& c, const Vec2& v) {
  return {reaction1(c, v[0], v[1]), reaction2(c, v[0], v[1])};
}

/// Jacobian of the reaction terms (off-diagonal entries are nonnegative on [0,1]^2).
inline Mat2 reaction_jacobian(const Rates& c, const Vec2& v) {
  Mat2 J;
  J(0, 0) = c.A1 * (1.0 - 2.0 * v[0]) - c.K1 * (1.0 - v[1]);
  J(0, 1) = c.K1 * v[0];
  J(1, 0) = c.K2 * (1.0 - v[1]);
  J(1, 1) = -c.A2 * (1.0 - 2.0 * v[1]) - c.K2 * v[0];
  return J;
}

/// A system bound to its semi-trivial periodic states; evaluates the cooperative kinetics.
class KineticModel {
 public:
  explicit KineticModel(SystemConfig sys, int m = 2048);
  KineticModel(SystemConfig sys, SemiTrivialStates states);

  const SystemConfig& system() const { return sys_; }
  const SemiTrivialStates& states() const { return states_; }
  double T() const { return sys_.T; }

  Rates rates(double t) const;
  Vec2 g(double t, const Vec2& v) const { return reaction(rates(t), v); }
  Mat2 jacobian(double t, const Vec2& v) const { return reaction_jacobian(rates(t), v); }

 private:
  SystemConfig sys_;
  SemiTrivialStates states_;
};

/// v1 = u1 / p1, v2 = (p2 - u2) / p2 and back.
Vec2 to_cooperative(const Vec2& u, double p1, double p2);
Vec2 from_cooperative(const Vec2& v, double p1, double p2);

/// Time samples of a kinetic solution and of the fundamental matrix of its linearization.
/// The fundamental matrix at sample k is exp(log_scale[k]) * phi[k]; the stored factor keeps
/// large-period runs finite.
struct KineticTrajectory {
  std::vector<double> t;
  std::vector<Vec2> v;
  std::vector<Mat2> phi;
  std::vector<double> log_scale;
  /// Integral of trace A along the trajectory, so det(monodromy) = exp(log_det).
  double log_det = 0.0;

  Mat2 monodromy() const { return phi.back(); }
  double monodromy_log_scale() const { return log_scale.back(); }
};

/// Classical RK4 with fixed steps on [t0, t1], carrying the variational system.
KineticTrajectory integrate_kinetics(const KineticModel& model, const Vec2& v0, double t0,
                                     double t1, int steps);

struct PoincareResult {
  Vec2 value;
  Mat2 monodromy;  // scaled by exp(log_scale)
  double log_scale = 0.0;
};

/// Time-T map and its derivative. Throws SolverBlowup if the state leaves [-0.1, 1.1]^2.
PoincareResult poincare_map(const KineticModel& model, const Vec2& v0, int m = 4096);

struct FixedPointOptions {
  int m = 4096;        // RK4 steps per period (raised to T / 0.005 for long periods)
  int segments = 0;    // shooting segments; 0 picks about one per time unit
  int max_iter = 50;
  double tol = 1e-12;
};

/// Newton (multiple shooting when T is long) for an interior T-periodic kinetic solution.
/// Segment seeds come from frozen saddles when they exist, otherwise from `seed`.
/// Throws NoInteriorFixedPoint on failure or when the limit is not interior.
KineticTrajectory find_interior_fixed_point(const KineticModel& model, const Vec2& seed,
                                            const FixedPointOptions& opt = {});

struct FloquetReport {
  /// Multipliers as exp(log_modulus) * exp(i arg); log form survives huge periods.
  std::complex<double> log_multiplier[2];
  /// Principal multiplier first (largest modulus).
  double lambda = 0.0;  // -ln(rho1) / T; negative means linearly unstable
  bool defective = false;
  bool principal_real = false;
  /// Unit principal eigen-direction along the trajectory (empty when defective or complex).
  std::vector<Vec2> direction;

  std::complex<double> multiplier(int k) const { return std::exp(log_multiplier[k]); }
};

FloquetReport floquet(const KineticModel& model, const KineticTrajectory& trajectory);

/// Floquet data from a scaled monodromy; used directly for generic matrix families.
FloquetReport floquet_from_monodromy(const Mat2& scaled, double log_scale, double log_det, double T);

/// Monodromy of x' = A(t) x over [0, T] by RK4; returned unscaled.
Mat2 monodromy_of(const std::function<Mat2(double)>& A, double T, int steps);

struct FrozenEquilibria {
  Vec2 zero{0.0, 0.0}, one{1.0, 1.0}, e0{0.0, 1.0};
  Vec2 saddle;
  Mat2 jacobian;
  double unstable_eigenvalue = 0.0, stable_eigenvalue = 0.0;
  Vec2 unstable_direction, stable_direction;  // unit length, first component positive
};

/// Equilibria of the kinetics frozen at s (requires the pointwise bistability condition at s).
FrozenEquilibria frozen_equilibria(const SystemConfig& sys, double s);

enum class KineticLimit { zero, one, saddle, undetermined };

struct Separatrix {
  std::vector<Vec2> points;  // sorted by increasing v1, v2 decreasing
  Vec2 saddle;
  bool truncated = false;

  /// Piecewise-linear h(v1); 0 beyond the right end when the curve meets v2 = 0, 1 at v1 = 0.
  double h(double v1) const;
  /// Predicted forward limit from the side of the curve.
  KineticLimit side(const Vec2& v) const;
};

Separatrix separatrix(const SystemConfig& sys, double s, int n_points = 400);

/// Forward-integrates the frozen kinetics and reports where the orbit settles.
KineticLimit classify_limit(const SystemConfig& sys, double s, const Vec2& v0, double t_max = 200.0,
                            double* closest_to_saddle = nullptr);

}  // namespace lvwave
