#include "lvwave/logistic.hpp"

#include "lvwave/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lvwave {

PeriodicState::PeriodicState(double T, std::vector<double> values, std::vector<double> slopes,
                             int species)
    : T_(T), values_(std::move(values)), slopes_(std::move(slopes)), species_(species) {
  if (values_.size() < 2 || values_.size() != slopes_.size())
    throw DomainError("PeriodicState: need at least two samples with slopes");
  constant_ = std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_[0]; }) &&
              std::all_of(slopes_.begin(), slopes_.end(), [](double d) { return d == 0.0; });
}

double PeriodicState::operator()(double t) const {
  if (constant_) return values_[0];
  const int m = intervals();
  double x = t / T_;
  x = (x - std::floor(x)) * m;
  int k = std::min(static_cast<int>(x), m - 1);
  const double u = x - k, h = T_ / m;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * values_[k] + (u3 - 2 * u2 + u) * h * slopes_[k] +
         (-2 * u3 + 3 * u2) * values_[k + 1] + (u3 - u2) * h * slopes_[k + 1];
}

double PeriodicState::slope(double t) const {
  if (constant_) return 0.0;
  const int m = intervals();
  double x = t / T_;
  x = (x - std::floor(x)) * m;
  int k = std::min(static_cast<int>(x), m - 1);
  const double u = x - k, h = T_ / m;
  const double u2 = u * u;
  return ((6 * u2 - 6 * u) * values_[k] + (3 * u2 - 4 * u + 1) * h * slopes_[k] +
          (-6 * u2 + 6 * u) * values_[k + 1] + (3 * u2 - 2 * u) * h * slopes_[k + 1]) /
         h;
}

double PeriodicState::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PeriodicState::max() const { return *std::max_element(values_.begin(), values_.end()); }

namespace {

void check_args(double T, int m) {
  if (!(T > 0.0)) throw DomainError("logistic: T must be positive");
  if (m < 2) throw DomainError("logistic: need at least two intervals");
}

PeriodicState constant_state(const PeriodicFn& r, const PeriodicFn& a, double T, int m, int species) {
  return PeriodicState(T, std::vector<double>(m + 1, r.mean() / a.mean()),
                       std::vector<double>(m + 1, 0.0), species);
}

std::vector<double> merged_breaks(const PeriodicFn& r, const PeriodicFn& a) {
  auto b = r.breakpoints();
  auto c = a.breakpoints();
  b.insert(b.end(), c.begin(), c.end());
  std::sort(b.begin(), b.end());
  return b;
}

PeriodicState with_slopes(const PeriodicFn& r, const PeriodicFn& a, double T,
                          std::vector<double> values, int species) {
  const int m = static_cast<int>(values.size()) - 1;
  std::vector<double> slopes(m + 1);
  for (int k = 0; k <= m; ++k) {
    const double s = static_cast<double>(k) / m;
    slopes[k] = values[k] * (r(s) - a(s) * values[k]);
  }
  return PeriodicState(T, std::move(values), std::move(slopes), species);
}

}  // namespace

PeriodicState periodic_logistic_closed_form(const PeriodicFn& r, const PeriodicFn& a, double T,
                                            int m, int species) {
  check_args(T, m);
  if (r.is_constant() && a.is_constant()) return constant_state(r, a, T, m, species);
  const auto breaks = merged_breaks(r, a);
  constexpr int n = 16;

  // J(s) = T int_0^s exp(T (R(tau) - R(s))) a(tau) dtau, advanced interval by interval.
  std::vector<double> R(m + 1, 0.0), J(m + 1, 0.0);
  for (int k = 0; k < m; ++k) {
    const double s0 = static_cast<double>(k) / m, s1 = static_cast<double>(k + 1) / m;
    const double dR = integrate_split(r, s0, s1, breaks, n);
    R[k + 1] = R[k] + dR;
    auto integrand = [&](double tau) {
      const double tail = integrate_split(r, tau, s1, breaks, n);
      return std::exp(-T * tail) * a(tau);
    };
    J[k + 1] = std::exp(-T * dR) * J[k] + T * integrate_split(integrand, s0, s1, breaks, n);
  }
  const double inv_p0 = J[m] / -std::expm1(-T * R[m]);
  std::vector<double> values(m + 1);
  for (int k = 0; k <= m; ++k) values[k] = 1.0 / (inv_p0 * std::exp(-T * R[k]) + J[k]);
  values[m] = values[0];
  return with_slopes(r, a, T, std::move(values), species);
}

PeriodicState periodic_logistic_ode(const PeriodicFn& r, const PeriodicFn& a, double T, int m,
                                    int species) {
  check_args(T, m);
  const auto breaks = merged_breaks(r, a);
  const double rmax = std::max(r.max(), 1e-12);

  // In rescaled time: dp/ds = T p (r - a p); dq/ds = T (r - 2 a p) q for the variation.
  auto rhs = [&](double s, double p, double q, double& dp, double& dq) {
    const double rs = r(s), as = a(s);
    dp = T * p * (rs - as * p);
    dq = T * (rs - 2.0 * as * p) * q;
  };
  auto rk4 = [&](double s0, double s1, double& p, double& q) {
    const int sub = std::max(1, static_cast<int>(std::ceil((s1 - s0) * T * rmax / 0.02)));
    const double h = (s1 - s0) / sub;
    for (int j = 0; j < sub; ++j) {
      const double s = s0 + j * h;
      double k1p, k1q, k2p, k2q, k3p, k3q, k4p, k4q;
      rhs(s, p, q, k1p, k1q);
      rhs(s + h / 2, p + h / 2 * k1p, q + h / 2 * k1q, k2p, k2q);
      rhs(s + h / 2, p + h / 2 * k2p, q + h / 2 * k2q, k3p, k3q);
      rhs(s + h, p + h * k3p, q + h * k3q, k4p, k4q);
      p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    }
  };
  // One grid interval, split at coefficient breakpoints so RK4 never straddles a kink.
  auto advance = [&](int k, double& p, double& q) {
    const double s0 = static_cast<double>(k) / m, s1 = static_cast<double>(k + 1) / m;
    double lo = s0;
    for (double b : breaks) {
      if (b <= s0 || b >= s1) continue;
      rk4(lo, b, p, q);
      lo = b;
    }
    rk4(lo, s1, p, q);
  };

  double p0 = r.mean() / a.mean();
  bool converged = false;
  for (int iter = 0; iter < 50 && !converged; ++iter) {
    double p = p0, q = 1.0;
    for (int k = 0; k < m; ++k) advance(k, p, q);
    const double step = (p - p0) / (q - 1.0);
    p0 -= step;
    if (!(p0 > 0.0) || !std::isfinite(p0)) throw ConvergenceError("logistic Newton left the positive axis");
    converged = std::abs(step) <= 1e-13 * std::max(1.0, std::abs(p0));
  }
  if (!converged) throw ConvergenceError("logistic Newton did not converge in 50 iterations");

  std::vector<double> values(m + 1);
  values[0] = p0;
  double p = p0, q = 1.0;
  for (int k = 0; k < m; ++k) {
    advance(k, p, q);
    values[k + 1] = p;
  }
  values[m] = values[0];
  return with_slopes(r, a, T, std::move(values), species);
}

SemiTrivialStates semi_trivial_states(const SystemConfig& sys, int m) {
  sys.validate();
  return {periodic_logistic_closed_form(sys.r1, sys.a1, sys.T, m, 1),
          periodic_logistic_closed_form(sys.r2, sys.a2, sys.T, m, 2)};
}

double logistic_mean_defect(const PeriodicFn& r, const PeriodicFn& a, const PeriodicState& p) {
  const auto breaks = merged_breaks(r, a);
  const int m = p.intervals();
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double s0 = static_cast<double>(k) / m, s1 = static_cast<double>(k + 1) / m;
    sum += integrate_split([&](double s) { return r(s) - a(s) * p(s * p.T()); }, s0, s1, breaks, 8);
  }
  return sum;
}

namespace {

double max_abs_ratio(const std::vector<LimitRow>& rows, double& band) {
  double lo = INFINITY, hi = 0.0;
  for (const auto& row : rows) {
    lo = std::min(lo, row.scaled);
    hi = std::max(hi, row.scaled);
  }
  band = hi <= 1e-13 ? 1.0 : hi / lo;
  return hi;
}

}  // namespace

LimitTable small_period_limit_check(const PeriodicFn& r, const PeriodicFn& a,
                                    const std::vector<double>& periods, int m) {
  LimitTable table;
  const double target = r.mean() / a.mean();
  for (double T : periods) {
    if (T > 1.0) throw DomainError("small_period_limit_check: periods must be <= 1");
    const auto p = periodic_logistic_closed_form(r, a, T, m);
    double dev = 0.0;
    for (double v : p.values()) dev = std::max(dev, std::abs(v - target));
    table.rows.push_back({T, dev, dev / T});
  }
  table.strictly_decreasing = true;
  bool slack_ok = true;
  for (std::size_t j = 1; j < table.rows.size(); ++j) {
    const double prev = table.rows[j - 1].deviation, cur = table.rows[j].deviation;
    if (table.rows[j].T >= table.rows[j - 1].T) throw DomainError("periods must be decreasing");
    if (!(cur < prev)) table.strictly_decreasing = false;
    if (cur > 1.05 * prev + 1e-13) slack_ok = false;
  }
  max_abs_ratio(table.rows, table.band);
  table.pass = slack_ok;
  return table;
}

LimitTable large_period_rate_check(const PeriodicFn& r, const PeriodicFn& a,
                                   const std::vector<double>& periods, int m) {
  LimitTable table;
  for (std::size_t j = 0; j < periods.size(); ++j) {
    const double T = periods[j];
    if (T < 10.0) throw DomainError("large_period_rate_check: periods must be >= 10");
    if (j > 0 && T <= periods[j - 1]) throw DomainError("periods must be increasing");
    const auto p = periodic_logistic_closed_form(r, a, T, m);
    double dev = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double s = static_cast<double>(k) / m;
      dev = std::max(dev, std::abs(p.values()[k] - r(s) / a(s)));
    }
    table.rows.push_back({T, dev, dev * T});
  }
  table.strictly_decreasing = true;
  for (std::size_t j = 1; j < table.rows.size(); ++j)
    if (!(table.rows[j].deviation < table.rows[j - 1].deviation)) table.strictly_decreasing = false;
  max_abs_ratio(table.rows, table.band);
  table.pass = table.band <= 4.0;
  return table;
}

}  // namespace lvwave
