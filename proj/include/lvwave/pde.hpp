#pragma once

#include "lvwave/kinetics.hpp"

#include <Eigen/Dense>

#include <vector>

namespace lvwave {

/// Truncated window [-L, L] with N cells, h = 2L / N.
struct Grid {
  double L = 150.0;
  int N = 3000;

  double h() const { return 2.0 * L / N; }
  static Grid from_spacing(double L, double h);
};

/// State of the cooperative system on the moving window. Absolute position of node j is
/// x(j) + shift. Node 0 is pinned to (1, 1) and node N to (0, 0).
struct WaveField {
  Eigen::ArrayXd v1, v2;
  double L = 0.0, h = 0.0;
  double t = 0.0;
  double shift = 0.0;
  long steps = 0;

  int cells() const { return static_cast<int>(v1.size()) - 1; }
  double x(int j) const { return -L + j * h; }
};

/// Monotone tanh front through (1,1) -> (0,0), centred at `center` with the given width.
WaveField initialize_front(const Grid& grid, double width = 5.0, double center = 0.0);

/// Resamples a tabulated profile (sorted abscissae) onto the grid; outside the table the
/// pinned limits are used.
WaveField initialize_from_profile(const Grid& grid, const std::vector<double>& x,
                                  const std::vector<double>& v1, const std::vector<double>& v2);

/// Strang-split IMEX stepper: Heun reaction over dt/2, Crank-Nicolson diffusion over dt with the
/// diffusivity at the half step, Heun reaction over dt/2. Second order in dt and h.
class ImexStepper {
 public:
  ImexStepper(const KineticModel& model, double dt);

  /// Advances one step; throws SolverBlowup on non-finite values.
  void step(WaveField& field);
  void advance(WaveField& field, long n);

  double dt() const { return dt_; }
  const KineticModel& model() const { return model_; }

 private:
  void react(WaveField& field, double t0, double tau);
  void diffuse(Eigen::ArrayXd& v, double alpha, int which);

  const KineticModel& model_;
  double dt_;
  Eigen::ArrayXd k1a_, k1b_, k2a_, k2b_, sa_, sb_, rhs_;
  // Cached Thomas elimination factors per component, valid for cached_alpha_.
  double cached_alpha_[2] = {-1.0, -1.0};
  Eigen::ArrayXd cprime_[2], denom_[2];
};

/// One step with a freshly built stepper (convenience for tests and small drivers).
void step(WaveField& field, const KineticModel& model, double dt);

/// Grid coordinate of the v1 = 1/2 crossing (first bracketing pair from the left).
/// Throws FrontLost or NonMonotoneFront.
double front_crossing(const WaveField& field);

/// Shifts the window by whole cells when the front drifts more than L/4 from the centre.
/// Returns the number of cells shifted (0 when already centred).
int recenter(WaveField& field);

/// Steps per period: max(1024, ceil(T / 0.01)) for periodic systems; autonomous systems use
/// dt = 0.01 with a unit sampling interval.
int default_steps_per_period(const SystemConfig& sys);

/// Sets flush-to-zero and denormals-are-zero for the lifetime of the guard.
class DenormalGuard {
 public:
  DenormalGuard();
  ~DenormalGuard();
  DenormalGuard(const DenormalGuard&) = delete;
  DenormalGuard& operator=(const DenormalGuard&) = delete;

 private:
  unsigned saved_ = 0;
};

}  // namespace lvwave
