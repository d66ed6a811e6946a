#include "lvwave/comparison.hpp"

#include "lvwave/errors.hpp"
#include "lvwave/pde.hpp"
#include "lvwave/quadrature.hpp"
#include "lvwave/wavespeed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lvwave {

double Lambdas::min() const {
  return std::min({minus[0], minus[1], plus[0], plus[1]});
}

std::vector<double> period_grid(const KineticModel& model, int min_intervals) {
  const double T = model.T();
  const int n = std::max({min_intervals, model.states().p1.intervals(), model.states().p2.intervals()});
  std::vector<double> grid;
  grid.reserve(n + 16);
  for (int k = 0; k <= n; ++k) grid.push_back(T * k / n);
  for (double b : model.system().breakpoints()) grid.push_back(T * b);
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double t : grid)
    if (t >= 0.0 && t <= T && (out.empty() || t - out.back() > 1e-12 * T)) out.push_back(t);
  out.back() = T;
  return out;
}

double reaction_slope(const Rates& c, int species, bool plus) {
  if (species == 0) return plus ? -c.A1 : c.A1 - c.K1;
  return plus ? c.A2 - c.K2 : -c.A2;
}

namespace {

// Gauss-Legendre integrals of f over each grid cell.
template <typename F>
std::vector<double> cell_integrals(const std::vector<double>& grid, F&& f) {
  std::vector<double> out(grid.size() - 1);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) out[k] = integrate(f, grid[k], grid[k + 1], 16);
  return out;
}

std::size_t cell_of(const std::vector<double>& grid, double t) {
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  if (it == grid.begin()) return 0;
  return std::min<std::size_t>(it - grid.begin() - 1, grid.size() - 2);
}

double wrap(double t, double T) {
  double r = std::fmod(t, T);
  if (r < 0) r += T;
  return r;
}

}  // namespace

Lambdas lambdas(const KineticModel& model) {
  const auto grid = period_grid(model);
  Lambdas out;
  for (int i = 0; i < 2; ++i) {
    for (bool plus : {false, true}) {
      const auto cells = cell_integrals(grid, [&](double t) { return reaction_slope(model.rates(t), i, plus); });
      double sum = 0.0;
      for (double c : cells) sum += c;
      (plus ? out.plus : out.minus)[i] = -sum / model.T();
    }
  }
  return out;
}

EigenPair::EigenPair(std::shared_ptr<const KineticModel> model, int species, bool plus)
    : model_(std::move(model)), species_(species), plus_(plus) {
  if (species != 0 && species != 1) throw DomainError("species index must be 0 or 1");
  grid_ = period_grid(*model_);
  const auto cells =
      cell_integrals(grid_, [&](double t) { return reaction_slope(model_->rates(t), species_, plus_); });
  double sum = 0.0;
  for (double c : cells) sum += c;
  lambda_ = -sum / model_->T();
  log_.assign(grid_.size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    log_[k + 1] = log_[k] + cells[k] + lambda_ * (grid_[k + 1] - grid_[k]);
}

double EigenPair::log_unscaled(double t) const {
  const double tw = wrap(t, model_->T());
  const std::size_t k = cell_of(grid_, tw);
  if (tw == grid_[k]) return log_[k];
  return log_[k] + integrate([&](double u) { return lambda_ + reaction_slope(model_->rates(u), species_, plus_); },
                             grid_[k], tw, 16);
}

double EigenPair::operator()(double t) const { return scale_ * std::exp(log_unscaled(t)); }

double EigenPair::derivative(double t) const {
  return (lambda_ + reaction_slope(model_->rates(t), species_, plus_)) * (*this)(t);
}

void EigenPair::rescale(double factor) {
  if (!(factor > 0.0)) throw DomainError("eigenfunction scale must be positive");
  scale_ *= factor;
}

double EigenPair::periodicity_defect() const { return log_.back() - log_.front(); }

double choose_mu(const Lambdas& l) {
  if (!(l.min() > 0.0))
    throw DomainError("decay exponents must be positive (0 and 1 not linearly stable); smallest is " +
                      std::to_string(l.min()));
  return 0.9 * 0.5 * l.min();
}

double sup_norm(const std::function<double(double)>& f, double a, double b, int samples) {
  samples = std::max(samples, 8);
  const double w = (b - a) / samples;
  int best = 0;
  double best_value = -INFINITY;
  for (int i = 0; i <= samples; ++i) {
    const double v = std::abs(f(a + i * w));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = a + std::max(best - 1, 0) * w, hi = a + std::min(best + 1, samples) * w;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(b - a)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = std::abs(f(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = std::abs(f(x1));
    }
  }
  return std::max({best_value, f1, f2});
}

EigenSystem normalized_eigenfunctions(const KineticModel& model, double mu) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  auto shared = std::make_shared<const KineticModel>(model);
  EigenSystem es;
  es.mu = mu;
  for (int i = 0; i < 2; ++i) {
    es.minus[i] = EigenPair(shared, i, false);
    es.plus[i] = EigenPair(shared, i, true);
    es.lambdas.minus[i] = es.minus[i].lambda();
    es.lambdas.plus[i] = es.plus[i].lambda();
  }
  if (mu > 0.5 * es.lambdas.min() * (1.0 + 1e-12))
    throw DomainError("mu exceeds half the smallest decay exponent");
  const double T = model.T();
  auto& p1 = es.plus[0];
  auto& m2 = es.minus[1];
  p1.rescale(1.0 / sup_norm([&](double t) { return p1(t); }, 0.0, T));
  m2.rescale(1.0 / sup_norm([&](double t) { return m2(t); }, 0.0, T));
  auto& p2 = es.plus[1];
  auto& m1 = es.minus[0];
  const double r2 = sup_norm([&](double t) { return model.rates(t).K1 * p2(t) / p1(t); }, 0.0, T);
  p2.rescale(0.25 * mu / r2);
  const double r1 = sup_norm([&](double t) { return model.rates(t).K2 * m1(t) / m2(t); }, 0.0, T);
  m1.rescale(0.25 * mu / r1);
  return es;
}

RhoValue rho(double xi) {
  if (xi <= 0.0) return {1.0, 0.0, 0.0};
  if (xi >= 2.0) return {0.0, 0.0, 0.0};
  if (xi <= 1.0) return {1.0 - 0.5 * xi * xi, -xi, -1.0};
  const double u = 2.0 - xi;
  return {0.5 * u * u, -u, 1.0};
}

Correctors::Correctors(const KineticModel& model) : model_(std::make_shared<const KineticModel>(model)) {
  const SystemConfig& sys = model_->system();
  const double p1 = sys.r1.mean() / sys.a1.mean(), p2 = sys.r2.mean() / sys.a2.mean();
  rbar_[0] = sys.r1.mean();
  rbar_[1] = sys.r2.mean();
  cross_[0] = sys.k1.mean() * p2;
  cross_[1] = sys.k2.mean() * p1;
  dbar_[0] = sys.d1.mean();
  dbar_[1] = sys.d2.mean();
  grid_ = period_grid(*model_);
  for (double& g : grid_) g /= model_->T();
  grid_.back() = 1.0;
  for (int w = 0; w < 6; ++w) {
    const auto cells = cell_integrals(grid_, [&](double s) { return integrand(w, s); });
    table_[w].assign(grid_.size(), 0.0);
    for (std::size_t k = 0; k < cells.size(); ++k) table_[w][k + 1] = table_[w][k] + cells[k];
  }
}

double Correctors::integrand(int which, double s) const {
  const double T = model_->T();
  const Rates c = model_->rates(s * T);
  switch (which) {
    case 0: return c.d1 - dbar_[0];
    case 1: return c.d2 - dbar_[1];
    case 2: return c.A1 - rbar_[0];
    case 3: return c.K1 - cross_[0];
    case 4: return c.A2 - rbar_[1];
    default: return c.K2 - cross_[1];
  }
}

double Correctors::cumulative(int which, double t) const {
  const double tau = t / model_->T();
  const double n = std::floor(tau);
  const double frac = tau - n;
  const auto& tab = table_[which];
  const std::size_t k = cell_of(grid_, frac);
  double partial = tab[k];
  if (frac > grid_[k]) partial += integrate([&](double s) { return integrand(which, s); }, grid_[k], frac, 16);
  return n * tab.back() + partial;
}

double Correctors::D(int species, double t) const { return cumulative(species == 0 ? 0 : 1, t); }

double Correctors::G(int species, double t, double v1, double v2) const {
  if (species == 0) return cumulative(2, t) * v1 * (1.0 - v1) - cumulative(3, t) * v1 * (1.0 - v2);
  return -cumulative(4, t) * v2 * (1.0 - v2) + cumulative(5, t) * v1 * (1.0 - v2);
}

std::pair<double, double> Correctors::period_defect(int species) const {
  return species == 0 ? std::pair{table_[2].back(), table_[3].back()}
                      : std::pair{table_[4].back(), table_[5].back()};
}

void SmallPeriodDrift::validate() const {
  for (double v : {L0, mu, nu_minus, nu_plus, eps, B0, beta0, T})
    if (!(v > 0.0)) throw DomainError("drift constants must be positive");
  if (!(eps > L0 * T / (mu * nu_minus))) throw DomainError("period too large for these drift constants");
}

double SmallPeriodDrift::q(double t) const {
  const double base = L0 * T / (mu * nu_minus);
  return base + (eps - base) * std::exp(-mu * nu_minus / nu_plus * t);
}

double SmallPeriodDrift::dq(double t) const {
  const double base = L0 * T / (mu * nu_minus), rate = mu * nu_minus / nu_plus;
  return -rate * (eps - base) * std::exp(-rate * t);
}

double SmallPeriodDrift::eta(double t) const {
  const double base = L0 * T / (mu * nu_minus), rate = mu * nu_minus / nu_plus;
  return -2.0 * (B0 + mu * nu_minus) / beta0 *
         (base * t + (eps - base) / rate * (1.0 - std::exp(-rate * t)));
}

double SmallPeriodDrift::deta(double t) const {
  const double base = L0 * T / (mu * nu_minus), rate = mu * nu_minus / nu_plus;
  return -2.0 * (B0 + mu * nu_minus) / beta0 * (base + (eps - base) * std::exp(-rate * t));
}

void LargePeriodDrift::validate() const {
  for (double v : {C5, gamma0, eps, K2, T})
    if (!(v > 0.0)) throw DomainError("drift constants must be positive");
  if (!(eps > 2.0 * C5 / (T * gamma0))) throw DomainError("period too small for these drift constants");
}

double LargePeriodDrift::q(double t) const {
  const double base = 2.0 * C5 / (T * gamma0);
  return base + (eps - base) * std::exp(-0.5 * gamma0 * t);
}

double LargePeriodDrift::dq(double t) const {
  const double base = 2.0 * C5 / (T * gamma0);
  return -0.5 * gamma0 * (eps - base) * std::exp(-0.5 * gamma0 * t);
}

double LargePeriodDrift::kappa(double t) const {
  const double base = 2.0 * C5 / (T * gamma0);
  return -K2 * (base * t + 2.0 / gamma0 * (eps - base) * (1.0 - std::exp(-0.5 * gamma0 * t)));
}

double LargePeriodDrift::dkappa(double t) const {
  const double base = 2.0 * C5 / (T * gamma0);
  return -K2 * (base + (eps - base) * std::exp(-0.5 * gamma0 * t));
}

double frozen_drift(const std::function<double(double)>& c, const std::vector<double>& breaks,
                    double T, double t) {
  std::vector<double> b{0.0, 1.0};
  for (double x : breaks)
    if (x > 0.0 && x < 1.0) b.push_back(x);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  const double tau = t / T;
  const double n = std::floor(tau), frac = tau - n;
  const double full = integrate_pieces(c, b, 8, 16);
  std::vector<double> part{0.0};
  for (double x : b)
    if (x > 0.0 && x < frac) part.push_back(x);
  part.push_back(frac);
  const double partial = frac > 0.0 ? integrate_pieces(c, part, 8, 16) : 0.0;
  return T * (n * full + partial);
}

ResidualReport check_residuals(const KineticModel& model, const SpaceTimeGrid& grid,
                               const FrameSource& frames, ResidualKind kind, double tol,
                               const std::function<void(double, double, double, double)>& emit) {
  if (grid.frames < 5 || grid.nodes < 5 || !(grid.dt > 0.0) || !(grid.h > 0.0))
    throw DomainError("residual grid needs at least five frames and five nodes");
  ResidualReport rep;
  rep.tol = tol;
  rep.min[0] = rep.min[1] = INFINITY;
  rep.max[0] = rep.max[1] = -INFINITY;
  std::vector<Eigen::ArrayXd> a(5), b(5);
  const double dt = grid.dt, h = grid.h;
  // Ring buffer: frame k lives in slot k % 5.
  for (int k = 0; k < grid.frames; ++k) {
    frames(k, a[k % 5], b[k % 5]);
    if (a[k % 5].size() != grid.nodes || b[k % 5].size() != grid.nodes)
      throw DomainError("frame size does not match the residual grid");
    const int c = k - 2;
    if (c < 2) continue;
    const double t = grid.t0 + c * dt;
    const Rates r = model.rates(t);
    const double d[2] = {r.d1, r.d2};
    const Eigen::ArrayXd* v[2][5];
    for (int o = -2; o <= 2; ++o) {
      v[0][o + 2] = &a[(c + o) % 5];
      v[1][o + 2] = &b[(c + o) % 5];
    }
    for (int j = 2; j + 2 < grid.nodes; ++j) {
      const double v1 = (*v[0][2])[j], v2 = (*v[1][2])[j];
      const double g[2] = {reaction1(r, v1, v2), reaction2(r, v1, v2)};
      double L[2];
      for (int i = 0; i < 2; ++i) {
        const auto& m = *v[i][2];
        const double dtf = ((*v[i][3])[j] - (*v[i][1])[j]) / (2.0 * dt);
        const double dtc = ((*v[i][4])[j] - (*v[i][0])[j]) / (4.0 * dt);
        const double dxf = (m[j + 1] - 2.0 * m[j] + m[j - 1]) / (h * h);
        const double dxc = (m[j + 2] - 2.0 * m[j] + m[j - 2]) / (4.0 * h * h);
        L[i] = dtf - d[i] * dxf - g[i];
        const double coarse = dtc - d[i] * dxc - g[i];
        rep.truncation = std::max(rep.truncation, std::abs(coarse - L[i]) / 3.0);
        rep.min[i] = std::min(rep.min[i], L[i]);
        rep.max[i] = std::max(rep.max[i], L[i]);
      }
      ++rep.points;
      if (emit) emit(t, grid.x0 + j * h, L[0], L[1]);
    }
  }
  if (rep.points == 0) throw DomainError("residual grid has no interior points");
  if (rep.truncation > 0.5 * tol)
    throw DomainError("grid too coarse: estimated truncation " + std::to_string(rep.truncation) +
                      " exceeds half the tolerance " + std::to_string(tol));
  const double lo = std::min(rep.min[0], rep.min[1]), hi = std::max(rep.max[0], rep.max[1]);
  switch (kind) {
    case ResidualKind::super_solution: rep.pass = lo >= -tol; break;
    case ResidualKind::sub_solution: rep.pass = hi <= tol; break;
    case ResidualKind::solution: rep.pass = lo >= -tol && hi <= tol; break;
  }
  return rep;
}

Vec2 UniformSuperSolution::value(double t) const {
  const double e = eps * std::exp(-0.5 * gamma0 * t);
  return {e * C1, e * C2};
}

Vec2 UniformSuperSolution::derivative(double t) const { return -0.5 * gamma0 * value(t); }

UniformSuperSolution uniform_super_solution(const SystemConfig& sys, double eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const A2Report a2 = check_a2(sys);
  if (!a2.holds) throw DomainError("the uniform super-solution needs (A2)");
  UniformSuperSolution w;
  w.eps = eps;
  w.gamma0 = a2.gamma0;
  w.theta_plus = sys.theta_plus();
  w.gamma_plus = std::max(sys.r1.max() / sys.a1.min(), sys.r2.max() / sys.a2.min());
  w.C2 = w.gamma0 / (8.0 * w.theta_plus * w.gamma_plus);
  w.C1 = w.gamma0 * w.C2 / (4.0 * w.theta_plus * w.gamma_plus);
  if (eps > std::min(1.0, 8.0 * w.theta_plus * w.gamma_plus / (7.0 * w.gamma0)))
    throw DomainError("eps above the admissible bound");
  return w;
}

UniformResidual check_uniform_super_solution(const KineticModel& model, const UniformSuperSolution& w,
                                             double t_end, int samples, double tol) {
  UniformResidual out;
  out.min_residual[0] = out.min_residual[1] = INFINITY;
  out.min_rate[0] = out.min_rate[1] = INFINITY;
  for (int k = 0; k <= samples; ++k) {
    const double t = t_end * k / samples;
    const Vec2 v = w.value(t), dv = w.derivative(t);
    const Vec2 res = dv - model.g(t, v);
    for (int i = 0; i < 2; ++i) {
      out.min_residual[i] = std::min(out.min_residual[i], res[i]);
      out.min_rate[i] = std::min(out.min_rate[i], res[i] / v[i]);
    }
  }
  out.strict = out.min_residual[0] > 0.0 && out.min_residual[1] > 0.0 && out.min_rate[0] > tol &&
               out.min_rate[1] > tol;
  return out;
}

WaveRecording record_wave(const KineticModel& model, const Grid& grid, double dt, double transient,
                          int frames) {
  if (frames < 5) throw DomainError("recording needs at least five frames");
  const SystemConfig& sys = model.system();
  const double P = sys.autonomous() ? 1.0 : sys.T;
  const int m = std::max(1, static_cast<int>(std::lround(P / dt)));
  const double step = P / m;
  const long periods = std::max<long>(2, static_cast<long>(std::ceil(transient / P)));
  const int chunk = std::max(1, std::min(m, static_cast<int>(std::ceil(1.0 / step))));
  DenormalGuard guard;
  WaveField field = initialize_front(grid);
  ImexStepper stepper(model, step);
  double previous = front_position(field), speed = 0.0;
  for (long p = 1; p <= periods; ++p) {
    for (int done = 0; done < m; done += chunk) {
      stepper.advance(field, std::min(chunk, m - done));
      recenter(field);
    }
    field.t = p * P;
    const double pos = front_position(field);
    speed = (pos - previous) / P;
    previous = pos;
  }
  WaveRecording rec;
  rec.t0 = field.t;
  rec.dt = step;
  rec.x0 = field.x(0) + field.shift;
  rec.h = field.h;
  rec.speed = speed;
  rec.v1.reserve(frames);
  rec.v2.reserve(frames);
  for (int k = 0; k < frames; ++k) {
    if (k > 0) stepper.step(field);
    rec.v1.push_back(field.v1);
    rec.v2.push_back(field.v2);
  }
  return rec;
}

SpaceTimeGrid PerturbedWave::grid(int margin) const {
  SpaceTimeGrid g;
  g.t0 = wave->t0;
  g.dt = wave->dt;
  g.frames = static_cast<int>(wave->v1.size());
  g.x0 = wave->x0 + margin * wave->h;
  g.h = wave->h;
  g.nodes = static_cast<int>(wave->v1.front().size()) - 2 * margin;
  return g;
}

FrameSource PerturbedWave::source(int margin) const {
  if (margin < 4) throw DomainError("interpolation margin must be at least four nodes");
  if ((std::abs(xi0) + eps * K) / wave->h + 4.0 > margin)
    throw DomainError("interpolation margin too small for the profile shift");
  return [this, margin](int k, Eigen::ArrayXd& v1, Eigen::ArrayXd& v2) {
    const WaveRecording& w = *wave;
    const int n = static_cast<int>(w.v1.front().size()) - 2 * margin;
    v1.resize(n);
    v2.resize(n);
    const double t = k * w.dt;
    const double decay = std::exp(-eig->mu * t);
    const double shift = xi0 + sign * eps * K * (decay - 1.0);
    const double psi_p[2] = {eig->plus[0](t), eig->plus[1](t)};
    const double psi_m[2] = {eig->minus[0](t), eig->minus[1](t)};
    for (int j = 0; j < n; ++j) {
      const double x = w.x0 + (margin + j) * w.h;
      // Six-point Lagrange interpolation of frame k at x + shift.
      const double pos = (x + shift - w.x0) / w.h;
      const int base = static_cast<int>(std::floor(pos)) - 2;
      const double u = pos - (base + 2);
      double c[6];
      for (int a = 0; a < 6; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 6; ++b) {
          if (b == a) continue;
          num *= (u - (b - 2));
          den *= (a - b);
        }
        c[a] = num / den;
      }
      double i1 = 0.0, i2 = 0.0;
      for (int a = 0; a < 6; ++a) {
        i1 += c[a] * w.v1[k][base + a];
        i2 += c[a] * w.v2[k][base + a];
      }
      const RhoValue r = rho(x - (front + w.speed * t) + shift);
      v1[j] = i1 + sign * eps * decay * (r.value * psi_p[0] + (1.0 - r.value) * psi_m[0]);
      v2[j] = i2 + sign * eps * decay * (r.value * psi_p[1] + (1.0 - r.value) * psi_m[1]);
    }
  };
}

}  // namespace lvwave
