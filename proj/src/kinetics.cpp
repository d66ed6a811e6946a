#include "lvwave/kinetics.hpp"

#include "lvwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lvwave {

KineticModel::KineticModel(SystemConfig sys, int m)
    : sys_(std::move(sys)), states_(semi_trivial_states(sys_, m)) {}

KineticModel::KineticModel(SystemConfig sys, SemiTrivialStates states)
    : sys_(std::move(sys)), states_(std::move(states)) {
  sys_.validate();
}

Rates KineticModel::rates(double t) const {
  const double s = t / sys_.T;
  const double p1 = states_.p1(t), p2 = states_.p2(t);
  return {sys_.a1(s) * p1, sys_.k1(s) * p2, sys_.a2(s) * p2, sys_.k2(s) * p1, sys_.d1(s), sys_.d2(s)};
}

Vec2 to_cooperative(const Vec2& u, double p1, double p2) { return {u[0] / p1, (p2 - u[1]) / p2}; }

Vec2 from_cooperative(const Vec2& v, double p1, double p2) { return {v[0] * p1, p2 * (1.0 - v[1])}; }

namespace {

bool in_box(const Vec2& v, double lo, double hi) {
  return v[0] >= lo && v[0] <= hi && v[1] >= lo && v[1] <= hi;
}

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

struct Stage {
  Vec2 dv;
  Mat2 dphi;
  double dtrace;
};

}  // namespace

KineticTrajectory integrate_kinetics(const KineticModel& model, const Vec2& v0, double t0,
                                     double t1, int steps) {
  if (steps < 1) throw DomainError("integrate_kinetics: need at least one step");
  KineticTrajectory traj;
  traj.t.reserve(steps + 1);
  traj.v.reserve(steps + 1);
  traj.phi.reserve(steps + 1);
  traj.log_scale.reserve(steps + 1);

  const double h = (t1 - t0) / steps;
  Vec2 v = v0;
  Mat2 phi = Mat2::Identity();
  double scale = 0.0, trace = 0.0;
  traj.t.push_back(t0);
  traj.v.push_back(v);
  traj.phi.push_back(phi);
  traj.log_scale.push_back(0.0);

  auto f = [&](double t, const Vec2& x, const Mat2& p) {
    const Rates c = model.rates(t);
    const Mat2 J = reaction_jacobian(c, x);
    return Stage{reaction(c, x), J * p, J.trace()};
  };
  for (int n = 0; n < steps; ++n) {
    const double t = t0 + n * h;
    const Stage k1 = f(t, v, phi);
    const Stage k2 = f(t + h / 2, v + h / 2 * k1.dv, phi + h / 2 * k1.dphi);
    const Stage k3 = f(t + h / 2, v + h / 2 * k2.dv, phi + h / 2 * k2.dphi);
    const Stage k4 = f(t + h, v + h * k3.dv, phi + h * k3.dphi);
    v += h / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
    phi += h / 6 * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi);
    trace += h / 6 * (k1.dtrace + 2 * k2.dtrace + 2 * k3.dtrace + k4.dtrace);
    if (!v.allFinite() || !in_box(v, -0.1, 1.1))
      throw SolverBlowup("kinetic state left [-0.1, 1.1]^2 at t = " + std::to_string(t + h) +
                         "; step count too coarse");
    const double c = max_abs(phi);
    if (c > 1e8 || c < 1e-8) {
      phi /= c;
      scale += std::log(c);
    }
    traj.t.push_back(t0 + (n + 1) * h);
    traj.v.push_back(v);
    traj.phi.push_back(phi);
    traj.log_scale.push_back(scale);
  }
  traj.log_det = trace;
  return traj;
}

PoincareResult poincare_map(const KineticModel& model, const Vec2& v0, int m) {
  if (m < 1) throw DomainError("poincare_map: need at least one step");
  const auto traj = integrate_kinetics(model, v0, 0.0, model.T(), m);
  return {traj.v.back(), traj.monodromy(), traj.monodromy_log_scale()};
}

KineticTrajectory find_interior_fixed_point(const KineticModel& model, const Vec2& seed,
                                            const FixedPointOptions& opt) {
  const double T = model.T();
  const int total = std::max(opt.m, static_cast<int>(std::ceil(T / 0.005)));
  const int K = opt.segments > 0 ? opt.segments : std::max(1, static_cast<int>(std::ceil(T)));
  const int per = std::max(1, (total + K - 1) / K);
  auto tau = [&](int j) { return T * j / K; };

  std::vector<Vec2> x(K, seed);
  if (K > 1) {
    for (int j = 0; j < K; ++j) {
      try {
        x[j] = frozen_equilibria(model.system(), static_cast<double>(j) / K).saddle;
      } catch (const DomainError&) {
      }
    }
  }

  std::vector<KineticTrajectory> segs(K);
  auto shoot = [&]() {
    for (int j = 0; j < K; ++j) segs[j] = integrate_kinetics(model, x[j], tau(j), tau(j + 1), per);
  };

  bool converged = false;
  for (int iter = 0; iter < opt.max_iter && !converged; ++iter) {
    try {
      shoot();
    } catch (const SolverBlowup& e) {
      throw NoInteriorFixedPoint(std::string("shooting left the order interval: ") + e.what());
    }
    Eigen::VectorXd F(2 * K);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * K, 2 * K);
    for (int j = 0; j < K; ++j) {
      const int next = (j + 1) % K;
      F.segment<2>(2 * j) = segs[j].v.back() - x[next];
      J.block<2, 2>(2 * j, 2 * j) += std::exp(segs[j].monodromy_log_scale()) * segs[j].monodromy();
      J.block<2, 2>(2 * j, 2 * next) -= Mat2::Identity();
    }
    if (F.lpNorm<Eigen::Infinity>() < opt.tol) {
      converged = true;
      break;
    }
    const Eigen::VectorXd delta = J.partialPivLu().solve(-F);
    if (!delta.allFinite()) throw NoInteriorFixedPoint("singular shooting Jacobian");
    double alpha = 1.0;
    auto admissible = [&](double a) {
      for (int j = 0; j < K; ++j)
        if (!in_box(x[j] + a * delta.segment<2>(2 * j), 0.0, 1.0)) return false;
      return true;
    };
    while (!admissible(alpha) && alpha > 1e-4) alpha *= 0.5;
    if (!admissible(alpha)) throw NoInteriorFixedPoint("Newton step cannot stay in [0,1]^2");
    for (int j = 0; j < K; ++j) x[j] += alpha * delta.segment<2>(2 * j);
    if (alpha == 1.0 && delta.lpNorm<Eigen::Infinity>() < opt.tol) {
      shoot();
      converged = true;
    }
  }
  if (!converged) throw NoInteriorFixedPoint("Newton did not converge in " + std::to_string(opt.max_iter) + " iterations");
  for (const auto& p : x) {
    if (std::min(p[0], p[1]) < 1e-8 || std::max(p[0], p[1]) > 1.0 - 1e-8)
      throw NoInteriorFixedPoint("iteration converged to a boundary state");
  }

  // Stitch segments; the fundamental matrix is carried across segment boundaries.
  KineticTrajectory out;
  Mat2 carry = Mat2::Identity();
  double carry_scale = 0.0;
  for (int j = 0; j < K; ++j) {
    const auto& s = segs[j];
    for (std::size_t k = j == 0 ? 0 : 1; k < s.t.size(); ++k) {
      Mat2 p = s.phi[k] * carry;
      const double c = max_abs(p);
      out.t.push_back(s.t[k]);
      out.v.push_back(s.v[k]);
      out.phi.push_back(p / c);
      out.log_scale.push_back(carry_scale + s.log_scale[k] + std::log(c));
    }
    carry = out.phi.back();
    carry_scale = out.log_scale.back();
    out.log_det += s.log_det;
  }
  return out;
}

FloquetReport floquet_from_monodromy(const Mat2& M, double log_scale, double log_det, double T) {
  FloquetReport rep;
  const double tr = M.trace(), det = M.determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    // Larger-modulus root without cancellation, the other from the determinant when possible.
    const double mu1 = tr >= 0 ? 0.5 * (tr + root) : 0.5 * (tr - root);
    rep.principal_real = true;
    rep.log_multiplier[0] = {log_scale + std::log(std::abs(mu1)), mu1 < 0 ? std::numbers::pi : 0.0};
    rep.log_multiplier[1] = {log_det - rep.log_multiplier[0].real(), rep.log_multiplier[0].imag()};
    rep.defective = root < 1e-12 * std::abs(mu1);
  } else {
    const double arg = std::atan2(std::sqrt(-disc), tr);
    rep.log_multiplier[0] = {0.5 * log_det, arg};
    rep.log_multiplier[1] = {0.5 * log_det, -arg};
    rep.defective = true;
  }
  rep.lambda = -rep.log_multiplier[0].real() / T;
  return rep;
}

FloquetReport floquet(const KineticModel& model, const KineticTrajectory& traj) {
  const Mat2 M = traj.monodromy();
  auto rep = floquet_from_monodromy(M, traj.monodromy_log_scale(), traj.log_det, model.T());
  if (rep.defective || !rep.principal_real) return rep;
  const double tr = M.trace(), root = std::sqrt(tr * tr - 4.0 * M.determinant());
  const double mu1 = tr >= 0 ? 0.5 * (tr + root) : 0.5 * (tr - root);
  // Eigenvector of M for mu1 from whichever row of M - mu1 I is better conditioned.
  const Mat2 B = M - mu1 * Mat2::Identity();
  Vec2 w = std::abs(B(0, 0)) + std::abs(B(0, 1)) >= std::abs(B(1, 0)) + std::abs(B(1, 1))
               ? Vec2(-B(0, 1), B(0, 0))
               : Vec2(-B(1, 1), B(1, 0));
  if (w.norm() == 0.0) w = Vec2(1.0, 0.0);
  w.normalize();
  rep.direction.reserve(traj.phi.size());
  for (const auto& p : traj.phi) {
    Vec2 d = p * w;
    d.normalize();
    if (d[0] + d[1] < 0) d = -d;
    rep.direction.push_back(d);
  }
  return rep;
}

Mat2 monodromy_of(const std::function<Mat2(double)>& A, double T, int steps) {
  const double h = T / steps;
  Mat2 phi = Mat2::Identity();
  for (int n = 0; n < steps; ++n) {
    const double t = n * h;
    const Mat2 k1 = A(t) * phi;
    const Mat2 k2 = A(t + h / 2) * (phi + h / 2 * k1);
    const Mat2 k3 = A(t + h / 2) * (phi + h / 2 * k2);
    const Mat2 k4 = A(t + h) * (phi + h * k3);
    phi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return phi;
}

FrozenEquilibria frozen_equilibria(const SystemConfig& sys, double s) {
  const Rates c{sys.r1(s), sys.k1(s) * sys.r2(s) / sys.a2(s), sys.r2(s), sys.k2(s) * sys.r1(s) / sys.a1(s),
                sys.d1(s), sys.d2(s)};
  if (!(c.K1 - c.A1 > strictness && c.K2 - c.A2 > strictness))
    throw DomainError("frozen kinetics at s = " + std::to_string(s) + " is not bistable");
  FrozenEquilibria eq;
  Mat2 L;
  L << -c.A1, c.K1, c.K2, -c.A2;
  eq.saddle = L.partialPivLu().solve(Vec2(c.K1 - c.A1, 0.0));
  eq.jacobian = reaction_jacobian(c, eq.saddle);
  const double tr = eq.jacobian.trace(), det = eq.jacobian.determinant();
  if (!(det < 0.0)) throw DomainError("interior equilibrium is not a saddle");
  const double root = std::sqrt(tr * tr - 4.0 * det);
  eq.unstable_eigenvalue = 0.5 * (tr + root);
  eq.stable_eigenvalue = 0.5 * (tr - root);
  auto direction = [&](double mu) {
    const Mat2 B = eq.jacobian - mu * Mat2::Identity();
    Vec2 w = std::abs(B(0, 0)) + std::abs(B(0, 1)) >= std::abs(B(1, 0)) + std::abs(B(1, 1))
                 ? Vec2(-B(0, 1), B(0, 0))
                 : Vec2(-B(1, 1), B(1, 0));
    w.normalize();
    return w[0] < 0 ? Vec2(-w) : w;
  };
  eq.unstable_direction = direction(eq.unstable_eigenvalue);
  eq.stable_direction = direction(eq.stable_eigenvalue);
  return eq;
}

double Separatrix::h(double v1) const {
  if (points.empty()) return NAN;
  if (v1 <= points.front()[0]) return points.front()[1];
  if (v1 >= points.back()[0]) return points.back()[1];
  auto it = std::lower_bound(points.begin(), points.end(), v1,
                             [](const Vec2& p, double x) { return p[0] < x; });
  const Vec2& b = *it;
  const Vec2& a = *(it - 1);
  const double u = (v1 - a[0]) / (b[0] - a[0]);
  return a[1] + u * (b[1] - a[1]);
}

KineticLimit Separatrix::side(const Vec2& v) const {
  const double hv = h(v[0]);
  if (v[1] > hv) return KineticLimit::one;
  if (v[1] < hv) return KineticLimit::zero;
  return KineticLimit::saddle;
}

Separatrix separatrix(const SystemConfig& sys, double s, int n_points) {
  const auto eq = frozen_equilibria(sys, s);
  const KineticModel model(sys.frozen(s));
  const Rates c = model.rates(0.0);
  Separatrix sep;
  sep.saddle = eq.saddle;
  constexpr double delta = 1e-6, dt = 0.002, t_max = 400.0;
  std::vector<Vec2> branch[2];
  for (int b = 0; b < 2; ++b) {
    Vec2 v = eq.saddle + (b == 0 ? -delta : delta) * eq.stable_direction;
    auto f = [&](const Vec2& x) { return Vec2(-reaction(c, x)); };
    for (double t = 0.0; t < t_max; t += dt) {
      const Vec2 k1 = f(v), k2 = f(v + dt / 2 * k1), k3 = f(v + dt / 2 * k2), k4 = f(v + dt * k3);
      const Vec2 next = v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!in_box(next, 0.0, 1.0)) {
        // Clip the last segment to the boundary of the square.
        double u = 1.0;
        for (int i = 0; i < 2; ++i) {
          if (next[i] < 0.0) u = std::min(u, v[i] / (v[i] - next[i]));
          if (next[i] > 1.0) u = std::min(u, (1.0 - v[i]) / (next[i] - v[i]));
        }
        branch[b].push_back(v + u * (next - v));
        if (!in_box(next, -0.5, 1.5)) sep.truncated = true;
        break;
      }
      v = next;
      branch[b].push_back(v);
      if ((v - eq.e0).norm() < 1e-9) break;
    }
  }
  std::vector<Vec2> all(branch[0].rbegin(), branch[0].rend());
  all.push_back(eq.saddle);
  all.insert(all.end(), branch[1].begin(), branch[1].end());
  std::sort(all.begin(), all.end(), [](const Vec2& p, const Vec2& q) { return p[0] < q[0]; });
  if (n_points > 1 && static_cast<int>(all.size()) > n_points) {
    // Keep the saddle and both ends; thin the rest evenly.
    std::vector<Vec2> thin;
    for (int k = 0; k < n_points; ++k)
      thin.push_back(all[static_cast<std::size_t>(std::llround(static_cast<double>(k) * (all.size() - 1) / (n_points - 1)))]);
    auto at = std::lower_bound(thin.begin(), thin.end(), eq.saddle[0],
                               [](const Vec2& p, double x) { return p[0] < x; });
    if (at == thin.end() || (*at - eq.saddle).norm() > 0.0) thin.insert(at, eq.saddle);
    all = std::move(thin);
  }
  sep.points = std::move(all);
  return sep;
}

KineticLimit classify_limit(const SystemConfig& sys, double s, const Vec2& v0, double t_max,
                            double* closest_to_saddle) {
  const KineticModel model(sys.frozen(s));
  const Rates c = model.rates(0.0);
  Vec2 saddle(NAN, NAN);
  try {
    saddle = frozen_equilibria(sys, s).saddle;
  } catch (const DomainError&) {
  }
  Vec2 v = v0;
  constexpr double dt = 0.005;
  double closest = (v - saddle).norm();
  auto f = [&](const Vec2& x) { return reaction(c, x); };
  for (double t = 0.0; t < t_max; t += dt) {
    const Vec2 k1 = f(v), k2 = f(v + dt / 2 * k1), k3 = f(v + dt / 2 * k2), k4 = f(v + dt * k3);
    v += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    closest = std::min(closest, (v - saddle).norm());
    if (v.norm() < 1e-6) break;
    if ((v - Vec2(1.0, 1.0)).norm() < 1e-6) break;
  }
  if (closest_to_saddle) *closest_to_saddle = closest;
  if (v.norm() < 1e-6) return KineticLimit::zero;
  if ((v - Vec2(1.0, 1.0)).norm() < 1e-6) return KineticLimit::one;
  if ((v - saddle).norm() < 1e-3) return KineticLimit::saddle;
  return KineticLimit::undetermined;
}

}  // namespace lvwave
