#include <doctest.h>

#include "lvwave/errors.hpp"
#include "lvwave/pde.hpp"

#include <cmath>
#include <random>

using namespace lvwave;

namespace {

// Smooth random perturbation: a few Gaussian bumps with random centres, widths and signs.
Eigen::ArrayXd smooth_noise(const WaveField& f, std::mt19937& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(f.v1.size());
  for (int b = 0; b < 4; ++b) {
    const double c = 0.8 * f.L * u(rng), w = 2.0 + 1.5 * (1.0 + u(rng)), a = amplitude * u(rng);
    for (int j = 0; j <= f.cells(); ++j) out[j] += a * std::exp(-std::pow((f.x(j) - c) / w, 2));
  }
  return out;
}

WaveField uniform_field(const Grid& g, double a, double b) {
  WaveField f = initialize_front(g);
  f.v1.setConstant(a);
  f.v2.setConstant(b);
  return f;
}

double sup_on_coarse(const WaveField& coarse, const WaveField& fine) {
  const int r = fine.cells() / coarse.cells();
  double m = 0.0;
  for (int j = 0; j <= coarse.cells(); ++j) {
    m = std::max(m, std::abs(coarse.v1[j] - fine.v1[r * j]));
    m = std::max(m, std::abs(coarse.v2[j] - fine.v2[r * j]));
  }
  return m;
}

// Least-squares slope and correlation of log v1 over [x0, x1] relative to the front.
std::pair<double, double> tail_fit(const WaveField& f, double x0, double x1) {
  const double xf = front_crossing(f);
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int j = 0; j <= f.cells(); ++j) {
    const double x = f.x(j) - xf;
    if (x < x0 || x > x1) continue;
    const double y = std::log(f.v1[j]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cxy = sxy - sx * sy / n, cxx = sxx - sx * sx / n, cyy = syy - sy * sy / n;
  return {cxy / cxx, cxy / std::sqrt(cxx * cyy)};
}

}  // namespace

TEST_CASE("tanh initial data") {
  const Grid g{150.0, 3000};
  const auto f = initialize_front(g);
  CHECK(f.v1[0] == 1.0);
  CHECK(f.v1[g.N] == 0.0);
  CHECK(1.0 - f.v1[1] < 1e-6);
  CHECK(f.v1[g.N - 1] < 1e-6);
  for (int j = 0; j < g.N; ++j) {
    CHECK(f.v1[j + 1] <= f.v1[j]);
    CHECK(f.v2[j + 1] <= f.v2[j]);
  }
  CHECK(std::abs(front_crossing(f)) <= g.h());
  CHECK(Grid::from_spacing(150.0, 0.05).N == 6000);
}

TEST_CASE("boundary equilibria are preserved away from the pins") {
  const KineticModel model(step_competition_family(0.02, 1.0));
  const Grid g{30.0, 600};
  for (const auto& e : {std::pair{0.0, 0.0}, std::pair{1.0, 1.0}, std::pair{0.0, 1.0}}) {
    WaveField f = uniform_field(g, e.first, e.second);
    ImexStepper stepper(model, 0.01);
    for (int k = 0; k < 20; ++k) {
      const Eigen::ArrayXd a = f.v1, b = f.v2;
      stepper.step(f);
      const int lo = g.N / 4, n = g.N / 2;
      CHECK((f.v1.segment(lo, n) - a.segment(lo, n)).abs().maxCoeff() <= 1e-12);
      CHECK((f.v2.segment(lo, n) - b.segment(lo, n)).abs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("order interval is invariant") {
  const KineticModel model(step_competition_family(0.02, 1.0));
  const Grid g{40.0, 800};
  std::mt19937 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    WaveField f = initialize_front(g);
    f.v1 = (f.v1 + smooth_noise(f, rng, 0.4)).max(0.0).min(1.0);
    f.v2 = (f.v2 + smooth_noise(f, rng, 0.4)).max(0.0).min(1.0);
    ImexStepper stepper(model, 1.0 / 1024);
    for (int k = 0; k < 2048; ++k) {
      stepper.step(f);
      if (k % 64 == 0) {
        REQUIRE(f.v1.minCoeff() >= -1e-9);
        REQUIRE(f.v2.minCoeff() >= -1e-9);
        REQUIRE(f.v1.maxCoeff() <= 1.0 + 1e-9);
        REQUIRE(f.v2.maxCoeff() <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("ordered initial data stay ordered") {
  const KineticModel model(step_competition_family(0.02, 1.0));
  const Grid g{40.0, 800};
  std::mt19937 rng(9);
  for (int pair = 0; pair < 20; ++pair) {
    WaveField hi = initialize_front(g, 4.0, 3.0);
    hi.v1 = (hi.v1 + smooth_noise(hi, rng, 0.2)).max(0.0).min(1.0);
    hi.v2 = (hi.v2 + smooth_noise(hi, rng, 0.2)).max(0.0).min(1.0);
    WaveField lo = hi;
    lo.v1 = (hi.v1 - smooth_noise(hi, rng, 0.3).abs()).max(0.0);
    lo.v2 = (hi.v2 - smooth_noise(hi, rng, 0.3).abs()).max(0.0);
    lo.v1[0] = lo.v2[0] = 1.0;
    ImexStepper a(model, 1.0 / 1024), b(model, 1.0 / 1024);
    for (int period = 0; period < 3; ++period) {
      a.advance(lo, 1024);
      b.advance(hi, 1024);
      CHECK((lo.v1 - hi.v1).maxCoeff() <= 1e-8);
      CHECK((lo.v2 - hi.v2).maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("second-order self-convergence on the frozen system") {
  const KineticModel model(step_competition_family(0.02).frozen(0.9));
  const double L = 30.0, t_end = 10.0;
  std::vector<WaveField> runs;
  for (int level = 0; level < 3; ++level) {
    const int scale = 1 << level;
    const Grid g{L, 150 * scale};
    const double dt = 0.04 / scale;
    WaveField f = initialize_front(g);
    ImexStepper(model, dt).advance(f, std::lround(t_end / dt));
    runs.push_back(f);
  }
  const double e1 = sup_on_coarse(runs[0], runs[1]), e2 = sup_on_coarse(runs[1], runs[2]);
  const double order = std::log2(e1 / e2);
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(order >= 1.8);
}

TEST_CASE("recentering preserves the absolute front position") {
  const Grid g{60.0, 1200};
  WaveField f = initialize_front(g);
  CHECK(recenter(f) == 0);
  CHECK(f.shift == 0.0);

  WaveField moved = initialize_front(g, 5.0, g.L / 3.0);
  const double before = front_crossing(moved) + moved.shift;
  const int k = recenter(moved);
  CHECK(k == std::lround(g.L / 3.0 / g.h()));
  CHECK(std::abs(front_crossing(moved) + moved.shift - before) <= g.h());

  WaveField back = initialize_front(g, 5.0, -g.L / 3.0);
  const double before_back = front_crossing(back) + back.shift;
  CHECK(recenter(back) < 0);
  CHECK(std::abs(front_crossing(back) + back.shift - before_back) <= g.h());
  CHECK(back.v1[0] == 1.0);
}

TEST_CASE("long runs keep the front away from the window edges") {
  const KineticModel model(step_competition_family(0.02, 1.0));
  const Grid g{40.0, 400};
  WaveField f = initialize_front(g);
  ImexStepper stepper(model, 1.0 / 1024);
  for (int period = 0; period < 100; ++period) {
    stepper.advance(f, 1024);
    recenter(f);
    CHECK(std::abs(front_crossing(f)) <= g.L - g.L / 8.0);
  }
}

TEST_CASE("front tracking errors") {
  const Grid g{20.0, 200};
  WaveField f = initialize_front(g);
  f.v1.setZero();
  CHECK_THROWS_AS(front_crossing(f), FrontLost);
  WaveField bump = initialize_front(g);
  bump.v1[150] = 0.9;
  CHECK_THROWS_AS(front_crossing(bump), NonMonotoneFront);
}

TEST_CASE("tail of the frozen wave is log-linear with a grid-stable slope") {
  const KineticModel model(step_competition_family(0.02).frozen(0.9));
  double slopes[2];
  for (int level = 0; level < 2; ++level) {
    const Grid g{60.0, 600 << level};
    WaveField f = initialize_front(g, 2.0);
    ImexStepper stepper(model, 0.01 / (1 << level));
    for (int unit = 0; unit < 40; ++unit) {
      stepper.advance(f, 100 << level);
      recenter(f);
    }
    const auto [slope, corr] = tail_fit(f, 4.0, 14.0);
    CHECK(slope < 0.0);
    CHECK(corr < -0.9999);
    slopes[level] = slope;
  }
  CHECK(std::abs(slopes[0] - slopes[1]) <= 0.1 * std::abs(slopes[1]));
}
