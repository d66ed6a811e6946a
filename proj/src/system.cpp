#include "lvwave/system.hpp"

#include "lvwave/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lvwave {

namespace {

std::array<const PeriodicFn*, 8> all(const SystemConfig& s) {
  return {&s.d1, &s.d2, &s.r1, &s.r2, &s.a1, &s.a2, &s.k1, &s.k2};
}

}  // namespace

void SystemConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("period T must be positive");
}

SystemConfig SystemConfig::with_period(double period) const {
  SystemConfig out = *this;
  out.T = period;
  out.validate();
  return out;
}

SystemConfig SystemConfig::swapped() const {
  SystemConfig out = *this;
  std::swap(out.d1, out.d2);
  std::swap(out.r1, out.r2);
  std::swap(out.a1, out.a2);
  std::swap(out.k1, out.k2);
  return out;
}

SystemConfig SystemConfig::frozen(double s) const {
  auto c = [s](const PeriodicFn& f) { return PeriodicFn::constant(f(s)); };
  return {c(d1), c(d2), c(r1), c(r2), c(a1), c(a2), c(k1), c(k2), 1.0};
}

SystemConfig SystemConfig::homogenized() const {
  auto c = [](const PeriodicFn& f) { return PeriodicFn::constant(f.mean()); };
  return {c(d1), c(d2), c(r1), c(r2), c(a1), c(a2), c(k1), c(k2), 1.0};
}

bool SystemConfig::autonomous() const {
  for (auto* f : all(*this))
    if (!f->is_constant()) return false;
  return true;
}

std::vector<double> SystemConfig::breakpoints() const {
  std::vector<double> pts;
  for (auto* f : all(*this)) {
    auto b = f->breakpoints();
    pts.insert(pts.end(), b.begin(), b.end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](double x, double y) { return y - x < 1e-15; }),
            pts.end());
  return pts;
}

double SystemConfig::theta_minus() const {
  double m = d1.min();
  for (auto* f : all(*this)) m = std::min(m, f->min());
  return m;
}

double SystemConfig::theta_plus() const {
  double m = d1.max();
  for (auto* f : all(*this)) m = std::max(m, f->max());
  return m;
}

SystemConfig constant_system(double d1, double d2, double r1, double r2, double a1, double a2,
                             double k1, double k2) {
  auto c = PeriodicFn::constant;
  return {c(d1), c(d2), c(r1), c(r2), c(a1), c(a2), c(k1), c(k2), 1.0};
}

SystemConfig step_competition_family(double half_width, double T, double low, double high,
                                     double split) {
  const auto one = PeriodicFn::constant(1.0);
  const auto r2 = PeriodicFn::mollified_step({low, high}, {0.0, split}, half_width);
  SystemConfig sys{one, one, one, r2, one, one, PeriodicFn::constant(1.0 / 3.0),
                   r2.affine(2.0, 4.0 / 3.0), T};
  sys.validate();
  return sys;
}

std::vector<double> assumption_samples(const SystemConfig& sys, int sample_count) {
  std::vector<double> s;
  s.reserve(sample_count + 16);
  for (int k = 0; k < sample_count; ++k) s.push_back(static_cast<double>(k) / sample_count);
  for (auto* f : all(sys))
    for (double c : f->special_points()) s.push_back(c);
  return s;
}

A1Report check_a1(const SystemConfig& sys) {
  const double p1 = sys.r1.mean() / sys.a1.mean();
  const double p2 = sys.r2.mean() / sys.a2.mean();
  A1Report rep;
  rep.margin1 = sys.r1.mean() - sys.k1.mean() * p2;
  rep.margin2 = sys.r2.mean() - sys.k2.mean() * p1;
  rep.holds = rep.margin1 < -strictness && rep.margin2 < -strictness;
  return rep;
}

A2Report check_a2(const SystemConfig& sys, int sample_count) {
  if (sample_count < 64) throw DomainError("check_a2: need at least 64 samples");
  A2Report rep;
  rep.min_margin = INFINITY;
  rep.gamma0_candidate = INFINITY;
  for (double s : assumption_samples(sys, sample_count)) {
    const double m1 = sys.k1(s) * sys.r2(s) / sys.a2(s) - sys.r1(s);
    const double m2 = sys.k2(s) * sys.r1(s) / sys.a1(s) - sys.r2(s);
    const double m = std::min(m1, m2);
    if (m < rep.min_margin) {
      rep.min_margin = m;
      rep.worst_s = s;
    }
    rep.gamma0_candidate = std::min({rep.gamma0_candidate, m, sys.r1(s), sys.r2(s)});
  }
  rep.holds = rep.min_margin > strictness;
  rep.gamma0 = 0.9 * rep.gamma0_candidate;
  return rep;
}

WangReport check_wang_conditions(const SystemConfig& sys, int sample_count) {
  double min_k1a2 = INFINITY, min_k2a1 = INFINITY, max_k1a2 = -INFINITY, max_k2a1 = -INFINITY;
  for (double s : assumption_samples(sys, sample_count)) {
    const double q1 = sys.k1(s) / sys.a2(s), q2 = sys.k2(s) / sys.a1(s);
    min_k1a2 = std::min(min_k1a2, q1);
    max_k1a2 = std::max(max_k1a2, q1);
    min_k2a1 = std::min(min_k2a1, q2);
    max_k2a1 = std::max(max_k2a1, q2);
  }
  const double r1 = sys.r1.mean(), r2 = sys.r2.mean();
  WangReport rep;
  rep.a2_margin1 = min_k1a2 * r2 - r1;
  rep.a2_margin2 = min_k2a1 * r1 - r2;
  rep.a3_margin1 = r1 + r2 - max_k2a1 * r1;
  rep.a3_margin2 = r1 + r2 - max_k1a2 * r2;
  rep.a2_cond = rep.a2_margin1 > strictness && rep.a2_margin2 > strictness;
  rep.a3_cond = rep.a3_margin1 > strictness && rep.a3_margin2 > strictness;
  return rep;
}

}  // namespace lvwave
