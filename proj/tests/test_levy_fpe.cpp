#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jumpom/levy_fpe.hpp"

using namespace jumpom;

namespace {

SpatialGrid grid1(double lo, double hi, int nodes) { return SpatialGrid{1, make_vec({lo}), make_vec({hi}), nodes}; }

FiniteActivityModel model(const std::string& drift, double sigma, const std::string& rate, double radius = 1.0) {
  return FiniteActivityModel::from_strings(1, {drift}, sigma, rate, JumpSizeDensity::bump(1, radius));
}

double gauss(double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); }

}  // namespace

TEST_CASE("pure diffusion follows the heat kernel") {
  const auto m = model("0", 1.0, "0");
  const double eps = 0.01;
  FpeOptions o;
  o.T = 0.5;
  o.steps = 5000;
  o.store_every = 2500;
  const auto f = solve_levy_fpe(m, make_vec({0.0}), eps, grid1(-8, 8, 512), o);
  REQUIRE(f.slices() == 3);
  for (std::size_t k = 1; k < f.slices(); ++k) {
    const double var = eps + f.times()[k];
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < f.grid().size(); ++i) {
      const double x = f.grid().node(i)(0);
      err = std::max(err, std::fabs(f.slice(k)(static_cast<Eigen::Index>(i)) - gauss(x, var)));
      peak = std::max(peak, gauss(x, var));
    }
    CHECK(err / peak < 1e-3);
  }
}

TEST_CASE("jump mass outside the diffusive core matches the one-jump expansion") {
  const double lam = 1.0, sigma = 0.05, eps = 1e-4, t = 0.05;
  const auto m = model("0", sigma, "1");
  FpeOptions o;
  o.T = t;
  o.steps = 500;
  o.store_every = 500;
  const auto f = solve_levy_fpe(m, make_vec({0.0}), eps, grid1(-2, 2, 800), o);
  const double r = 3.0 * std::sqrt(eps + sigma * sigma * t);
  double mass = 0.0;
  for (std::size_t i = 0; i < f.grid().size(); ++i)
    if (std::fabs(f.grid().node(i)(0)) > r) mass += f.slice(1)(static_cast<Eigen::Index>(i)) * f.grid().cell_volume();
  const auto& nu = m.jump();
  const double tail = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                [&](double z) { return nu(make_vec({z})); }, r, 1.0, 10, 1e-12);
  const double oracle = lam * t * tail;
  CHECK(std::fabs(mass - oracle) / oracle < 0.1);
}

TEST_CASE("mass audit holds at every slice") {
  const auto m = model("-x + 0.25*x^3", 0.6, "1 + 0.5*sin(x)", 0.8);
  FpeOptions o;
  o.T = 0.5;
  o.steps = 1000;
  o.store_every = 50;
  const auto f = solve_levy_fpe(m, make_vec({0.3}), 1e-2, grid1(-4, 4, 400), o);
  for (std::size_t k = 0; k < f.slices(); ++k) {
    const double audited = f.mass(k) - f.clipped_mass(k);
    CHECK(audited >= 1.0 - o.tol_mass);
    CHECK(audited <= 1.0 + 1e-9);
    CHECK(f.slice(k).minCoeff() >= 0.0);
  }
}

TEST_CASE("grid convolution and Gauss-Legendre gain agree") {
  const auto m = model("-x", 0.5, "1 + 0.3*tanh(x)", 0.8);
  FpeOptions o;
  o.T = 0.2;
  o.steps = 200;
  o.store_every = 200;
  const auto a = solve_levy_fpe(m, make_vec({0.0}), 1e-2, grid1(-4, 4, 800), o);
  o.jump_scheme = JumpScheme::gauss_legendre;
  o.gl_nodes = 64;
  const auto b = solve_levy_fpe(m, make_vec({0.0}), 1e-2, grid1(-4, 4, 800), o);
  const double diff = (a.slice(1) - b.slice(1)).cwiseAbs().maxCoeff();
  CHECK(diff / a.peak(1) < 1e-3);
}

TEST_CASE("gain-loss and theta forms of the jump term coincide") {
  const auto m = model("0", 1.0, "1 + 0.5*sin(x)", 1.0);
  auto p = [](const Vec& x) { return gauss(x(0) - 0.2, 0.3); };
  auto dp = [](const Vec& x) { return make_vec({-(x(0) - 0.2) / 0.3 * gauss(x(0) - 0.2, 0.3)}); };
  for (double x : {-0.7, 0.0, 0.4, 1.1}) {
    const double a = jump_term_gain_loss(m, p, make_vec({x}));
    const double b = jump_term_theta_form(m, p, dp, make_vec({x}));
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
  }
}

TEST_CASE("short-time law with the source rate, and the negative control") {
  const double eps = 1e-5;
  FpeOptions o;
  o.T = 2e-3;
  o.steps = 200;
  o.store_every = 50;
  const auto m = model("0", 0.1, "1 + 0.5*sin(x)", 1.0);
  const auto f = solve_levy_fpe(m, make_vec({0.5}), eps, grid1(-2, 3, 4000), o);
  const auto good = short_time_limit_check(f, m, {1e-3, 2e-3}, LimitForm::at_source);
  const auto wrong = short_time_limit_check(f, m, {1e-3, 2e-3}, LimitForm::at_target);
  CHECK(good.rows.front().max_relative_error < 0.05);
  CHECK(wrong.rows.front().max_relative_error > 0.2);

  CHECK_THROWS_AS(short_time_relative_error(f, m, make_vec({0.55}), 1), Error);
}

TEST_CASE("guards") {
  const auto m = model("0", 1.0, "1", 1.0);
  FpeOptions o;
  o.T = 0.1;
  o.steps = 10;
  CHECK_THROWS_AS(solve_levy_fpe(m, make_vec({0.0}), 1e-2, grid1(-1.5, 1.5, 200), o), Error);  // radius > width/4
  CHECK_THROWS_AS(solve_levy_fpe(m, make_vec({0.0}), 1e-4, grid1(-4, 4, 100), o), Error);     // h too coarse
  CHECK_THROWS_AS(solve_levy_fpe(model("0", 1.0, "x"), make_vec({0.0}), 1e-2, grid1(-4, 4, 400), o), Error);
  CHECK_THROWS_AS(solve_levy_fpe(m, make_vec({5.0}), 1e-2, grid1(-4, 4, 400), o), Error);
  try {
    solve_levy_fpe(m, make_vec({0.0}), 1e-4, grid1(-4, 4, 100), o);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(e.module() == "levy_fpe");
  }
}

TEST_CASE("mass leaving the box is reported") {
  const auto m = model("3", 0.5, "1", 0.5);
  FpeOptions o;
  o.T = 1.0;
  o.steps = 400;
  CHECK_THROWS_AS(solve_levy_fpe(m, make_vec({0.0}), 1e-2, grid1(-2, 2, 200), o), Error);
}

TEST_CASE("density field interpolation and time bracketing") {
  SpatialGrid g = grid1(0, 1, 4);  // nodes at 0.125, 0.375, 0.625, 0.875
  DensityField f(g, make_vec({0.5}), 0.1);
  Eigen::VectorXd a(4), b(4);
  a << 0, 1, 2, 3;
  b << 2, 3, 4, 5;
  f.push_slice(0.0, a, 0.0);
  f.push_slice(1.0, b, 0.0);
  CHECK(f.value(make_vec({0.5}), std::size_t{0}) == doctest::Approx(1.5));
  CHECK(f.value(make_vec({0.5}), 0.25) == doctest::Approx(2.0));
  CHECK(f.value(make_vec({2.0}), std::size_t{0}) == 0.0);
  CHECK(f.slice_at(1.0) == 1);
  CHECK_THROWS(f.push_slice(0.5, a, 0.0));
}

TEST_CASE("2D solve conserves mass and stays symmetric") {
  const auto m = FiniteActivityModel::from_strings(2, {"-x1", "-x2"}, 0.5, "1", JumpSizeDensity::bump(2, 0.5));
  SpatialGrid g{2, make_vec({-2.5, -2.5}), make_vec({2.5, 2.5}), 100};
  FpeOptions o;
  o.T = 0.2;
  o.steps = 100;
  o.store_every = 100;
  const auto f = solve_levy_fpe(m, make_vec({0.0, 0.0}), 0.01, g, o);
  CHECK(f.mass(1) - f.clipped_mass(1) >= 1.0 - 1e-4);
  CHECK(f.value(make_vec({0.3, -0.2}), std::size_t{1}) ==
        doctest::Approx(f.value(make_vec({-0.2, 0.3}), std::size_t{1})).epsilon(1e-10));
}
