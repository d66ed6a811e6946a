#pragma once

#include "lvwave/kinetics.hpp"
#include "lvwave/pde.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace lvwave {

/// Period means of the reaction slopes at 0 and 1 (lambda_i^- and lambda_i^+), indexed by species
/// 0 and 1. All four are positive when 0 and 1 are linearly stable.
struct Lambdas {
  double minus[2] = {0.0, 0.0};
  double plus[2] = {0.0, 0.0};
  double min() const;
};

/// Time grid over one period: uniform in s aligned with the semi-trivial state knots, plus every
/// coefficient breakpoint, so each cell carries a smooth integrand.
std::vector<double> period_grid(const KineticModel& model, int min_intervals = 256);

Lambdas lambdas(const KineticModel& model);

/// Slope d g_i / d v_i at 0 (plus = false) or 1 (plus = true) along the period; species is 0 or 1.
double reaction_slope(const Rates& c, int species, bool plus);

/// Positive T-periodic solution of psi' - (d g_i / d v_i) psi = lambda psi, in the explicit
/// exponential form. Values between grid nodes come from Gauss-Legendre integration of the
/// exponent from the nearest node.
class EigenPair {
 public:
  EigenPair() = default;
  EigenPair(std::shared_ptr<const KineticModel> model, int species, bool plus);

  int species() const { return species_; }
  bool plus() const { return plus_; }
  double lambda() const { return lambda_; }
  double T() const { return model_->T(); }
  double scale() const { return scale_; }

  double operator()(double t) const;
  /// Exact derivative (lambda + slope) psi.
  double derivative(double t) const;
  /// Multiplies psi by a positive factor.
  void rescale(double factor);
  /// log psi(T) - log psi(0) before rounding; zero when lambda is the period mean.
  double periodicity_defect() const;

 private:
  double log_unscaled(double t) const;

  std::shared_ptr<const KineticModel> model_;
  int species_ = 0;
  bool plus_ = false;
  double lambda_ = 0.0, scale_ = 1.0;
  std::vector<double> grid_, log_;
};

/// mu = 0.9 times the smallest halved exponent; DomainError unless all four are positive.
double choose_mu(const Lambdas& l);

/// Supremum of a continuous function over [a, b]: dense sampling refined by golden-section search.
double sup_norm(const std::function<double(double)>& f, double a, double b, int samples = 4096);

/// The four eigenfunctions with the normalization |psi1+| = 1, |psi2-| = 1,
/// |K1 psi2+ / psi1+| = mu / 4 and |K2 psi1- / psi2-| = mu / 4 (sup norms over a period,
/// K1 = k1 p2 and K2 = k2 p1).
struct EigenSystem {
  Lambdas lambdas;
  double mu = 0.0;
  EigenPair minus[2], plus[2];
};
EigenSystem normalized_eigenfunctions(const KineticModel& model, double mu);

/// Cutoff with rho = 1 on (-inf, 0], rho = 0 on [2, inf), -1 <= rho' <= 0 and |rho''| <= 1.
/// Piecewise quadratic (C^{1,1}): 1 - x^2 / 2 on [0, 1] and (2 - x)^2 / 2 on [1, 2].
struct RhoValue {
  double value = 0.0, d1 = 0.0, d2 = 0.0;
};
RhoValue rho(double xi);

/// Homogenization correctors D_i(t) = integral_0^{t/T} (d_i - mean d_i) and
/// G_i(t, v) = integral_0^{t/T} (g_i(T tau, v) - mean-coefficient g_i(v)) d tau.
/// G is T-periodic only when mean(k1 p2) = mean(k1) mean(p2) and mean(k2 p1) = mean(k2) mean(p1).
class Correctors {
 public:
  explicit Correctors(const KineticModel& model);

  double D(int species, double t) const;
  double G(int species, double t, double v1, double v2) const;
  /// Values after one full period of the two coefficient integrals multiplying the quadratic
  /// terms of G_i; both vanish exactly when G_i is periodic.
  std::pair<double, double> period_defect(int species) const;

 private:
  double cumulative(int which, double t) const;
  double integrand(int which, double s) const;

  std::shared_ptr<const KineticModel> model_;
  double rbar_[2], cross_[2], dbar_[2];
  std::vector<double> grid_;
  std::vector<double> table_[6];
};

/// Small-period drift functions: q_T solving nu+ q' + mu nu- q - L0 T = 0, q(0) = eps, and eta_T
/// solving -(beta0 / 2) eta' + nu+ q' - B0 q - L0 T = 0, eta(0) = 0.
struct SmallPeriodDrift {
  double L0 = 0, mu = 0, nu_minus = 0, nu_plus = 0, eps = 0, B0 = 0, beta0 = 0, T = 0;

  /// DomainError for nonpositive constants or when eps <= L0 T / (mu nu-), where q stops decreasing.
  void validate() const;
  double q(double t) const;
  double dq(double t) const;
  double eta(double t) const;
  double deta(double t) const;
};

/// Large-period drift functions: q_T solving q' + (gamma0 / 2) q - C5 / T = 0, q(0) = eps, and
/// kappa_T with kappa(0) = 0 and slope -K2 (2 C5 / (T gamma0) + (eps - 2 C5 / (T gamma0)) e^(-gamma0 t / 2)).
struct LargePeriodDrift {
  double C5 = 0, gamma0 = 0, eps = 0, K2 = 0, T = 0;

  void validate() const;
  double q(double t) const;
  double dq(double t) const;
  double kappa(double t) const;
  double dkappa(double t) const;
};

/// X_T(t) = integral_0^t c(tau / T) d tau for a 1-periodic frozen speed c, integrated piecewise
/// between breakpoints.
double frozen_drift(const std::function<double(double)>& c, const std::vector<double>& breaks,
                    double T, double t);

/// Space-time sampling used by the residual checker: frames t0 + k dt, nodes x0 + j h.
struct SpaceTimeGrid {
  double t0 = 0.0, dt = 0.0;
  int frames = 0;
  double x0 = 0.0, h = 0.0;
  int nodes = 0;
};

/// Produces frame k (requested once each, in increasing order) into v1 and v2.
using FrameSource = std::function<void(int k, Eigen::ArrayXd& v1, Eigen::ArrayXd& v2)>;

enum class ResidualKind { super_solution, sub_solution, solution };

struct ResidualReport {
  /// Extremes of L_i = d_t v_i - d_i d_xx v_i - g_i(t, v) over interior points, species 0 and 1.
  double min[2] = {0.0, 0.0}, max[2] = {0.0, 0.0};
  /// Largest self-estimated finite-difference truncation (from the doubled stencil).
  double truncation = 0.0;
  double tol = 0.0;
  long points = 0;
  bool pass = false;
};

/// Central-difference residuals of a candidate pair. Super-solutions pass when every residual is
/// >= -tol, sub-solutions when <= tol, solutions when |L| <= tol. Throws DomainError when the
/// estimated truncation exceeds tol / 2. `emit`, when set, receives (t, x, L1, L2) per point.
ResidualReport check_residuals(const KineticModel& model, const SpaceTimeGrid& grid,
                               const FrameSource& frames, ResidualKind kind, double tol,
                               const std::function<void(double, double, double, double)>& emit = {});

/// Spatially uniform strict super-solution eps (C1, C2) e^(-gamma0 t / 2) near 0 for large periods,
/// with C2 = gamma0 / (8 theta+ gamma+) and C1 = gamma0 C2 / (4 theta+ gamma+).
struct UniformSuperSolution {
  double eps = 0, gamma0 = 0, theta_plus = 0, gamma_plus = 0, C1 = 0, C2 = 0;
  Vec2 value(double t) const;
  Vec2 derivative(double t) const;
};
UniformSuperSolution uniform_super_solution(const SystemConfig& sys, double eps);

struct UniformResidual {
  /// Smallest residual v_i' - g_i and smallest residual rate (residual / v_i), per species.
  double min_residual[2] = {0.0, 0.0};
  double min_rate[2] = {0.0, 0.0};
  bool strict = false;
};
/// Samples t in [0, t_end]; strict when every residual is positive and every rate exceeds tol.
UniformResidual check_uniform_super_solution(const KineticModel& model, const UniformSuperSolution& w,
                                             double t_end, int samples, double tol);

/// Recorded wave over a window: frames of the moving-window solution at uniform times.
struct WaveRecording {
  double t0 = 0.0, dt = 0.0, x0 = 0.0, h = 0.0, speed = 0.0;
  std::vector<Eigen::ArrayXd> v1, v2;
};

/// Runs the solver past its transient, then records `frames` consecutive steps starting at a
/// multiple of the period, without recentering inside the window.
WaveRecording record_wave(const KineticModel& model, const Grid& grid, double dt, double transient,
                          int frames);

/// Perturbed-wave pair v+/- (sign = +1 or -1) built from a recorded wave: the profile shifted by
/// xi0 +/- eps K (e^(-mu t) - 1), plus or minus eps e^(-mu t) (rho psi+ + (1 - rho) psi-), with
/// t measured from the start of the recording and rho evaluated at x - front position shifted
/// the same way.
struct PerturbedWave {
  const WaveRecording* wave = nullptr;
  const EigenSystem* eig = nullptr;
  double eps = 0.0, K = 0.0, xi0 = 0.0;
  int sign = 1;
  /// Front position at the start of the recording (centre of the rho window is at xi = 0).
  double front = 0.0;

  SpaceTimeGrid grid(int margin) const;
  FrameSource source(int margin) const;
};

}  // namespace lvwave
