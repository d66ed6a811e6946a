#include "lvwave/periodic_fn.hpp"

#include "lvwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lvwave {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double s) { return s - std::floor(s); }

// Signed cyclic offset of s from c, in [-1/2, 1/2).
double cyclic_offset(double s, double c) {
  double d = wrap(s) - c;
  if (d >= 0.5) d -= 1.0;
  if (d < -0.5) d += 1.0;
  return d;
}

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::constant: return "constant";
    case Family::trigonometric: return "trigonometric";
    case Family::mollified_step: return "mollified_step";
  }
  return "unknown";
}

double smoothstep(double x, int order) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return order == 0 ? 1.0 : 0.0;
  switch (order) {
    case 0: return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    case 1: return 30.0 * x * x * (1.0 - x) * (1.0 - x);
    default: return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
  }
}

PeriodicFn PeriodicFn::constant(double value) {
  PeriodicFn f(Family::constant);
  f.c0_ = value;
  f.finish();
  return f;
}

PeriodicFn PeriodicFn::trigonometric(double mean, std::vector<double> cos_coeffs,
                                     std::vector<double> sin_coeffs) {
  PeriodicFn f(Family::trigonometric);
  f.c0_ = mean;
  f.a_ = std::move(cos_coeffs);
  f.b_ = std::move(sin_coeffs);
  f.finish();
  return f;
}

PeriodicFn PeriodicFn::mollified_step(std::vector<double> values, std::vector<double> centers,
                                      double half_width) {
  if (values.size() != centers.size() || values.size() < 2)
    throw DomainError("mollified_step: need matching values and centers, at least two plateaus");
  if (!(half_width >= 0.0)) throw DomainError("mollified_step: half-width must be >= 0");
  for (double& c : centers) c = wrap(c);
  std::vector<std::size_t> order(values.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return centers[x] < centers[y]; });
  PeriodicFn f(Family::mollified_step);
  for (auto j : order) {
    f.values_.push_back(values[j]);
    f.centers_.push_back(centers[j]);
  }
  const std::size_t n = f.centers_.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double next = j + 1 < n ? f.centers_[j + 1] : f.centers_[0] + 1.0;
    if (next - f.centers_[j] <= 2.0 * half_width)
      throw DomainError("mollified_step: transitions overlap");
  }
  f.delta_ = half_width;
  f.finish();
  return f;
}

double PeriodicFn::eval(double s, int order) const {
  switch (family_) {
    case Family::constant:
      return order == 0 ? c0_ : 0.0;
    case Family::trigonometric: {
      double sum = order == 0 ? c0_ : 0.0;
      const std::size_t n = std::max(a_.size(), b_.size());
      for (std::size_t k = 1; k <= n; ++k) {
        const double w = two_pi * static_cast<double>(k);
        const double c = std::cos(w * s), sn = std::sin(w * s);
        const double ak = k <= a_.size() ? a_[k - 1] : 0.0;
        const double bk = k <= b_.size() ? b_[k - 1] : 0.0;
        if (order == 0) sum += ak * c + bk * sn;
        else if (order == 1) sum += w * (-ak * sn + bk * c);
        else sum += -w * w * (ak * c + bk * sn);
      }
      return sum;
    }
    case Family::mollified_step: {
      const std::size_t n = centers_.size();
      for (std::size_t j = 0; j < n; ++j) {
        const double d = cyclic_offset(s, centers_[j]);
        if (delta_ > 0.0 && std::abs(d) < delta_) {
          const double jump = values_[j] - values_[(j + n - 1) % n];
          const double x = (d + delta_) / (2.0 * delta_);
          return (order == 0 ? values_[(j + n - 1) % n] : 0.0) +
                 jump * smoothstep(x, order) / std::pow(2.0 * delta_, order);
        }
      }
      if (order > 0) return 0.0;
      const double w = wrap(s);
      // Plateau j covers (centers[j], centers[j+1]]; before centers[0] we are on the last one.
      std::size_t j = n - 1;
      for (std::size_t i = 0; i < n; ++i)
        if (centers_[i] < w) j = i;
      return values_[j];
    }
  }
  return 0.0;
}

std::vector<double> PeriodicFn::breakpoints() const {
  std::vector<double> pts{0.0, 1.0};
  if (family_ == Family::mollified_step) {
    for (double c : centers_) {
      for (double p : {c - delta_, c + delta_, c}) {
        const double w = wrap(p);
        if (w > 0.0) pts.push_back(w);
      }
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](double x, double y) { return y - x < 1e-15; }),
            pts.end());
  return pts;
}

std::vector<double> PeriodicFn::special_points() const {
  if (family_ == Family::mollified_step) return centers_;
  return {};
}

PeriodicFn PeriodicFn::affine(double offset, double scale) const {
  PeriodicFn f = *this;
  f.c0_ = offset + scale * c0_;
  for (double& x : f.a_) x *= scale;
  for (double& x : f.b_) x *= scale;
  for (double& x : f.values_) x = offset + scale * x;
  f.finish();
  return f;
}

void PeriodicFn::finish() {
  mean_ = family_ == Family::constant ? c0_ : mean_of(*this, breakpoints());
  if (family_ == Family::constant) {
    min_ = max_ = c0_;
  } else if (family_ == Family::mollified_step) {
    // Transitions are monotone, so the extrema are plateau values.
    min_ = *std::min_element(values_.begin(), values_.end());
    max_ = *std::max_element(values_.begin(), values_.end());
  } else {
    min_ = max_ = eval(0.0, 0);
    for (int k = 1; k < 4096; ++k) {
      const double v = eval(k / 4096.0, 0);
      min_ = std::min(min_, v);
      max_ = std::max(max_, v);
    }
  }
  if (!std::isfinite(mean_) || !(min_ > 0.0))
    throw DomainError("periodic coefficient must be finite and positive");
}

double mean(const PeriodicFn& f) { return f.mean(); }

}  // namespace lvwave
