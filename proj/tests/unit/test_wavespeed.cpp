#include <doctest.h>

#include "lvwave/parallel.hpp"
#include "lvwave/wavespeed.hpp"

#include <cmath>
#include <random>

using namespace lvwave;

namespace {

SpeedOptions coarse(double L = 60.0, double h = 0.1) {
  SpeedOptions o;
  o.grid = Grid::from_spacing(L, h);
  return o;
}

// Composite Simpson rule on a fine uniform grid, independent of the Gauss-Legendre code.
template <typename F>
double simpson(F&& f, double a, double b, int n) {
  const double w = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * w);
  return sum * w / 3.0;
}

}  // namespace

TEST_CASE("explicit speeds") {
  CHECK(exact_speed(12.0) == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-14));
  CHECK(exact_speed(3.5) == doctest::Approx(5.0 * std::sqrt(21.0) / 42.0).epsilon(1e-14));
  CHECK(exact_speed(6.0) == 0.0);
  CHECK(std::abs(exact_speed(19.0 / 3.0) + std::sqrt(38.0) / 114.0) < 1e-12);
  CHECK_THROWS_AS(exact_speed(3.0), DomainError);
  CHECK_THROWS_AS(exact_speed(-1.0), DomainError);
}

TEST_CASE("front position conventions") {
  const Grid g{20.0, 400};
  WaveField f = initialize_front(g);
  CHECK(std::abs(front_position(f)) <= g.h());

  // Exact step between nodes j and j + 1.
  const int j = 173;
  for (int k = 0; k <= g.N; ++k) f.v1[k] = k <= j ? 1.0 : 0.0;
  CHECK(std::abs(front_position(f) - (f.x(j) + 0.5 * g.h())) <= 0.5 * g.h() + 1e-12);

  const double delta = 37 * g.h();
  const WaveField a = initialize_front(g, 3.0), b = initialize_front(g, 3.0, delta);
  CHECK(std::abs(front_position(b) - front_position(a) - delta) < 1e-10);
  WaveField c = a;
  c.shift = 4.0;
  CHECK(front_position(c) == doctest::Approx(front_position(a) + 4.0));
}

TEST_CASE("least-squares fit against an independent solver") {
  std::mt19937 rng(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> t, x;
  for (int i = 0; i < 40; ++i) {
    t.push_back(i);
    x.push_back(i < 5 ? 100.0 : 2.0 + 0.3 * i + noise(rng));
  }
  const auto est = fit_speed(t, x, 5);
  Eigen::MatrixXd A(35, 2);
  Eigen::VectorXd y(35);
  for (int i = 5; i < 40; ++i) {
    A(i - 5, 0) = 1.0;
    A(i - 5, 1) = t[i];
    y[i - 5] = x[i];
  }
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = y - A * beta;
  const double sigma2 = r.squaredNorm() / 33.0;
  const double se = std::sqrt(sigma2 * (A.transpose() * A).inverse()(1, 1));
  CHECK(est.speed == doctest::Approx(beta[1]).epsilon(1e-12));
  CHECK(est.ci == doctest::Approx(2.0 * se).epsilon(1e-10));
  CHECK(est.residual_rms == doctest::Approx(std::sqrt(r.squaredNorm() / 35.0)).epsilon(1e-10));
  CHECK_THROWS_AS(fit_speed({0.0, 1.0}, {0.0, 1.0}, 0), DomainError);
}

TEST_CASE("frozen sections reproduce the explicit speeds") {
  const auto fam = step_competition_family(0.02);
  for (double s : {0.3, 0.9}) {
    const auto est = measure_speed(fam.frozen(s), coarse());
    CHECK(est.converged);
    CHECK(est.residual_rms <= speed_residual_limit(est.h));
    CHECK(est.times.size() - est.first_fit >= 10);
    CHECK(std::abs(est.speed - exact_speed(fam.r2(s))) < 0.02);
  }
  const auto balanced = step_competition_family(0.02, 1.0, 6.0, 6.0);
  CHECK(std::abs(measure_speed(balanced.frozen(0.5), coarse()).speed) < 0.02);
}

TEST_CASE("symmetric coefficients give a standing wave") {
  const auto r = PeriodicFn::trigonometric(1.0, {0.2}, {0.1});
  const auto k = PeriodicFn::trigonometric(1.8, {}, {0.3});
  const auto d = PeriodicFn::trigonometric(1.0, {0.1}, {});
  const SystemConfig sys{d, d, r, r, PeriodicFn::constant(1.0), PeriodicFn::constant(1.0), k, k, 2.0};
  const auto est = measure_speed(sys, coarse());
  CHECK(std::abs(est.speed) <= 1e-3);
  const auto hom = homogenized_speed(sys, coarse());
  CHECK(std::abs(hom.estimate.speed) <= 1e-3);
  CHECK_FALSE(hom.closed_form.has_value());
}

TEST_CASE("homogenized speed of the explicit family") {
  const auto fam = step_competition_family(0.02, 0.1);
  const auto hom = homogenized_speed(fam, coarse());
  REQUIRE(hom.closed_form.has_value());
  CHECK(*hom.closed_form == doctest::Approx(-std::sqrt(38.0) / 114.0).epsilon(1e-12));
  CHECK(std::abs(hom.estimate.speed - *hom.closed_form) <= 0.02);
}

TEST_CASE("translation invariance") {
  const auto sys = step_competition_family(0.02, 1.5);
  SpeedOptions a = coarse(), b = coarse();
  b.init_center = 50 * b.grid.h();
  const auto ea = measure_speed(sys, a), eb = measure_speed(sys, b);
  CHECK(std::abs(ea.speed - eb.speed) < 1e-10);
  REQUIRE(ea.positions.size() == eb.positions.size());
  for (std::size_t i = 0; i < ea.positions.size(); ++i)
    CHECK(std::abs(eb.positions[i] - ea.positions[i] - b.init_center) < 1e-9);
}

TEST_CASE("reflection swaps the sign of the speed") {
  const auto fam = step_competition_family(0.02);
  for (double s : {0.3, 0.9}) {
    const auto sys = fam.frozen(s);
    const auto a = measure_speed(sys, coarse()), b = measure_speed(sys.swapped(), coarse());
    CHECK(std::abs(a.speed + b.speed) <= 2.0 * std::max(a.ci, b.ci));
  }
}

TEST_CASE("speed converges at second order under grid refinement") {
  // Fixed time step, so the differences isolate the spatial error. At h = 0.2 the h^4 term
  // still pushes the ratio to 4.02; from h = 0.1 down it is 4.0005.
  const auto sys = step_competition_family(0.02).frozen(0.9);
  double c[3];
  for (int k = 0; k < 3; ++k) c[k] = measure_speed(sys, coarse(60.0, 0.1 / (1 << k))).speed;
  CHECK(std::abs(c[0] - c[1]) <= 4.0 * std::abs(c[1] - c[2]) + 1e-6);
  CHECK(std::abs(c[1] - c[2]) < std::abs(c[0] - c[1]));
}

TEST_CASE("mean frozen speed") {
  const double sharp_value = 5.0 * std::sqrt(21.0) / 63.0 - std::sqrt(2.0) / 6.0;
  const auto sharp = mean_frozen_speed(step_competition_family(0.0));
  CHECK(sharp.exact);
  CHECK(std::abs(sharp.value - sharp_value) < 1e-10);

  const auto flat = mean_frozen_speed(step_competition_family(0.02, 1.0, 12.0, 12.0));
  CHECK(std::abs(flat.value - exact_speed(12.0)) < 1e-12);

  // Mollified family against composite Simpson over each smooth piece.
  const auto fam = step_competition_family(0.02);
  const auto moll = mean_frozen_speed(fam, {.refine_tol = 1e-12});
  auto breaks = fam.breakpoints();
  std::sort(breaks.begin(), breaks.end());
  double oracle = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k)
    if (breaks[k + 1] > breaks[k])
      oracle += simpson([&](double s) { return exact_speed(fam.r2(s)); }, breaks[k], breaks[k + 1], 2000);
  CHECK(std::abs(moll.value - oracle) < 1e-10);

  // Sign of c(s) follows 6 - r2(s) at every node.
  for (std::size_t i = 0; i < moll.s.size(); ++i) {
    const double r = fam.r2(moll.s[i]);
    CHECK((moll.speed[i] > 0) == (r < 6.0));
  }
  double wsum = 0.0;
  for (double w : moll.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("front-tracking path of the mean speed") {
  const auto fam = step_competition_family(0.02);
  MeanSpeedOptions opts;
  opts.allow_exact = false;
  opts.nodes_per_piece = 2;
  opts.pde = coarse(40.0, 0.1);
  opts.threads = 3;
  const auto pde = mean_frozen_speed(fam, opts);
  CHECK_FALSE(pde.exact);
  double exact = 0.0;
  for (std::size_t i = 0; i < pde.s.size(); ++i) exact += pde.weights[i] * exact_speed(fam.r2(pde.s[i]));
  CHECK(std::abs(pde.value - exact) < 2e-3);
  opts.threads = 1;
  CHECK(mean_frozen_speed(fam, opts).value == pde.value);
}

TEST_CASE("sign classification") {
  CHECK(sign_classify(0.054, 0.002, 1e-3) == SpeedSign::positive);
  CHECK(sign_classify(2e-4, 1e-4, 1e-3) == SpeedSign::zero);
  CHECK(sign_classify(-0.128, 0.003, 1e-3) == SpeedSign::negative);
  CHECK(sign_classify(5e-4, 1e-3, 1e-3) == SpeedSign::indeterminate);
  CHECK(to_string(SpeedSign::zero) == "zero");
}

TEST_CASE("unconverged runs carry their partial data") {
  const auto sys = step_competition_family(0.02).frozen(0.5);
  SpeedOptions o = coarse();
  o.init_width = 25.0;
  o.discard_periods = 1;
  o.run_periods = 12;
  try {
    measure_speed(sys, o);
    FAIL("expected UnconvergedSpeed");
  } catch (const UnconvergedSpeed& e) {
    CHECK(e.estimate.times.size() == 13);
    CHECK_FALSE(e.estimate.converged);
    CHECK(e.estimate.residual_rms > speed_residual_limit(e.estimate.h));
  }
  o.strict = false;
  CHECK_FALSE(measure_speed(sys, o).converged);
  o.run_periods = 5;
  CHECK_THROWS_AS(measure_speed(sys, o), DomainError);
}

TEST_CASE("parallel map is schedule independent") {
  std::vector<double> a(37), b(37);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(1.0 + i); });
  parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(1.0 + i); });
  CHECK(a == b);
  CHECK_THROWS_AS(parallel_for(5, 2, [](std::size_t i) {
                    if (i == 3) throw DomainError("x");
                  }),
                  DomainError);
}
