#include "lvwave/pde.hpp"

#include "lvwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace lvwave {

Grid Grid::from_spacing(double L, double h) {
  const int N = static_cast<int>(std::lround(2.0 * L / h));
  if (N < 4) throw DomainError("grid needs at least four cells");
  return {L, N};
}

namespace {

WaveField empty_field(const Grid& grid) {
  if (!(grid.L > 0.0) || grid.N < 4) throw DomainError("invalid grid");
  WaveField f;
  f.L = grid.L;
  f.h = grid.h();
  f.v1 = Eigen::ArrayXd::Zero(grid.N + 1);
  f.v2 = Eigen::ArrayXd::Zero(grid.N + 1);
  return f;
}

void pin(WaveField& f) {
  f.v1[0] = f.v2[0] = 1.0;
  f.v1[f.cells()] = f.v2[f.cells()] = 0.0;
}

}  // namespace

WaveField initialize_front(const Grid& grid, double width, double center) {
  WaveField f = empty_field(grid);
  for (int j = 0; j <= grid.N; ++j) {
    const double v = 0.5 * (1.0 - std::tanh((f.x(j) - center) / width));
    f.v1[j] = f.v2[j] = v;
  }
  pin(f);
  return f;
}

WaveField initialize_from_profile(const Grid& grid, const std::vector<double>& x,
                                  const std::vector<double>& v1, const std::vector<double>& v2) {
  if (x.size() < 2 || x.size() != v1.size() || x.size() != v2.size())
    throw DomainError("profile tables must have matching sizes >= 2");
  WaveField f = empty_field(grid);
  for (int j = 0; j <= grid.N; ++j) {
    const double xj = f.x(j);
    if (xj <= x.front()) {
      f.v1[j] = f.v2[j] = 1.0;
    } else if (xj >= x.back()) {
      f.v1[j] = f.v2[j] = 0.0;
    } else {
      const auto it = std::upper_bound(x.begin(), x.end(), xj);
      const std::size_t k = it - x.begin();
      const double u = (xj - x[k - 1]) / (x[k] - x[k - 1]);
      f.v1[j] = v1[k - 1] + u * (v1[k] - v1[k - 1]);
      f.v2[j] = v2[k - 1] + u * (v2[k] - v2[k - 1]);
    }
  }
  pin(f);
  return f;
}

ImexStepper::ImexStepper(const KineticModel& model, double dt) : model_(model), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
}

void ImexStepper::react(WaveField& f, double t0, double tau) {
  const Rates c0 = model_.rates(t0), c1 = model_.rates(t0 + tau);
  k1a_ = reaction1(c0, f.v1, f.v2);
  k1b_ = reaction2(c0, f.v1, f.v2);
  sa_ = f.v1 + tau * k1a_;
  sb_ = f.v2 + tau * k1b_;
  k2a_ = reaction1(c1, sa_, sb_);
  k2b_ = reaction2(c1, sa_, sb_);
  f.v1 += (0.5 * tau) * (k1a_ + k2a_);
  f.v2 += (0.5 * tau) * (k1b_ + k2b_);
}

void ImexStepper::diffuse(Eigen::ArrayXd& v, double alpha, int which) {
  const int N = static_cast<int>(v.size()) - 1;
  auto& cp = cprime_[which];
  auto& inv = denom_[which];
  if (alpha != cached_alpha_[which] || cp.size() != N) {
    cp.resize(N);
    inv.resize(N);
    const double b = 1.0 + 2.0 * alpha;
    double prev = 0.0;
    for (int j = 1; j < N; ++j) {
      const double d = b + alpha * prev;  // b - a c'_{j-1} with a = -alpha
      inv[j] = 1.0 / d;
      prev = -alpha * inv[j];
      cp[j] = prev;
    }
    cached_alpha_[which] = alpha;
  }
  rhs_.resize(N + 1);
  // Explicit half of Crank-Nicolson, boundary contributions folded into the end rows.
  for (int j = 1; j < N; ++j) rhs_[j] = alpha * (v[j - 1] + v[j + 1]) + (1.0 - 2.0 * alpha) * v[j];
  rhs_[1] += alpha * v[0];
  rhs_[N - 1] += alpha * v[N];
  double prev = 0.0;
  for (int j = 1; j < N; ++j) {
    prev = (rhs_[j] + alpha * prev) * inv[j];
    rhs_[j] = prev;
  }
  v[N - 1] = rhs_[N - 1];
  for (int j = N - 2; j >= 1; --j) v[j] = rhs_[j] - cp[j] * v[j + 1];
}

void ImexStepper::step(WaveField& f) {
  const double t = f.t, half = 0.5 * dt_;
  react(f, t, half);
  const auto& sys = model_.system();
  const double s_mid = (t + half) / sys.T;
  const double scale = dt_ / (2.0 * f.h * f.h);
  diffuse(f.v1, sys.d1(s_mid) * scale, 0);
  diffuse(f.v2, sys.d2(s_mid) * scale, 1);
  react(f, t + half, half);
  pin(f);
  ++f.steps;
  f.t = t + dt_;
  if (!f.v1.allFinite() || !f.v2.allFinite())
    throw SolverBlowup("non-finite state after step " + std::to_string(f.steps) + " at t = " +
                       std::to_string(f.t));
}

void ImexStepper::advance(WaveField& f, long n) {
  for (long k = 0; k < n; ++k) step(f);
}

void step(WaveField& field, const KineticModel& model, double dt) {
  ImexStepper stepper(model, dt);
  stepper.step(field);
}

double front_crossing(const WaveField& f) {
  const int N = f.cells();
  int j = -1;
  for (int k = 0; k < N; ++k) {
    if (f.v1[k] >= 0.5 && f.v1[k + 1] < 0.5) {
      j = k;
      break;
    }
  }
  if (j < 0) throw FrontLost("v1 does not cross 1/2");
  for (int k = j + 3; k <= N; ++k) {
    if (f.v1[k] >= 0.5)
      throw NonMonotoneFront("v1 crosses 1/2 again at x = " + std::to_string(f.x(k) + f.shift));
  }
  const double a = f.v1[j], b = f.v1[j + 1];
  return f.x(j) + f.h * (a - 0.5) / (a - b);
}

int recenter(WaveField& f) {
  const double xf = front_crossing(f);
  if (std::abs(xf) <= f.L / 4.0) return 0;
  const int k = static_cast<int>(std::lround(xf / f.h));
  const int N = f.cells();
  if (std::abs(k) >= N) throw FrontLost("front left the window");
  if (k > 0) {
    f.v1.head(N + 1 - k) = f.v1.tail(N + 1 - k).eval();
    f.v2.head(N + 1 - k) = f.v2.tail(N + 1 - k).eval();
    f.v1.tail(k).setZero();
    f.v2.tail(k).setZero();
  } else {
    const int m = -k;
    f.v1.tail(N + 1 - m) = f.v1.head(N + 1 - m).eval();
    f.v2.tail(N + 1 - m) = f.v2.head(N + 1 - m).eval();
    f.v1.head(m).setOnes();
    f.v2.head(m).setOnes();
  }
  f.shift += k * f.h;
  pin(f);
  return k;
}

int default_steps_per_period(const SystemConfig& sys) {
  if (sys.autonomous()) return 100;
  return std::max(1024, static_cast<int>(std::ceil(sys.T / 0.01)));
}

DenormalGuard::DenormalGuard() {
#if defined(__SSE__)
  saved_ = _mm_getcsr();
  _mm_setcsr(saved_ | 0x8040u);
#endif
}

DenormalGuard::~DenormalGuard() {
#if defined(__SSE__)
  _mm_setcsr(saved_);
#endif
}

}  // namespace lvwave
