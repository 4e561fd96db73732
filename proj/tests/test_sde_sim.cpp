#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jumpom/levy_fpe.hpp"
#include "jumpom/sde_sim.hpp"

using namespace jumpom;

namespace {

FiniteActivityModel model(const std::string& drift, double sigma, const std::string& rate, double radius = 1.0) {
  return FiniteActivityModel::from_strings(1, {drift}, sigma, rate, JumpSizeDensity::bump(1, radius));
}

}  // namespace

TEST_CASE("zero drift and zero noise keep the start point") {
  const auto p = simulate_diffusion([](const Vec&, double) { return make_vec({0.0}); }, 0.0, make_vec({0.3}), 1.0,
                                    50, 1);
  REQUIRE(p.x.rows() == 51);
  for (Eigen::Index i = 0; i < p.x.rows(); ++i) CHECK(p.x(i, 0) == 0.3);
  CHECK(p.t.back() == 1.0);
}

TEST_CASE("deterministic ODE limit") {
  const auto p = simulate_diffusion([](const Vec& x, double) { return Vec(-x); }, 0.0, make_vec({1.0}), 1.0, 10000, 1);
  CHECK(std::fabs(p.x(10000, 0) - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("OU variance at T=2") {
  const auto m = model("-x", 1.0, "0");
  EnsembleOptions o;
  o.n_paths = 100000;
  o.n_steps = 1000;
  o.T = 2.0;
  o.snapshot_times = {2.0};
  o.seed = 17;
  const auto r = simulate_jump_ensemble(m, InitialLaw{make_vec({0.0}), 0.0}, o);
  const Eigen::VectorXd x = r.snapshots[0].col(0);
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
  const double expected = 0.5 * (1.0 - std::exp(-4.0));
  const double stderr_var = expected * std::sqrt(2.0 / static_cast<double>(x.size() - 1));
  CHECK(std::fabs(var - expected) < 3.0 * stderr_var);
}

TEST_CASE("zero rate reproduces Euler-Maruyama bit for bit") {
  const auto m = model("-x + 0.25*x^3", 0.8, "0");
  const auto a = simulate_jump_diffusion(m, make_vec({0.2}), 1.0, 500, 0.0, 99, 7);
  const auto b = simulate_diffusion([&](const Vec& x, double) { return m.drift(x); }, 0.8, make_vec({0.2}), 1.0, 500,
                                    99, 7);
  CHECK(a.jumps.empty());
  CHECK((a.x.array() == b.x.array()).all());

  // A positive λ̄ proposes events but rejects all of them; still identical.
  const auto c = simulate_jump_diffusion(m, make_vec({0.2}), 1.0, 500, 5.0, 99, 7);
  CHECK(c.jumps.empty());
  CHECK((c.x.array() == b.x.array()).all());
}

TEST_CASE("constant rate: mean jump count is lambda T") {
  const auto m = model("0", 0.3, "2");
  EnsembleOptions o;
  o.n_paths = 100000;
  o.n_steps = 50;
  o.T = 5.0;
  o.lambda_bar = 2.0;
  o.snapshot_times = {5.0};
  o.seed = 4;
  const auto r = simulate_jump_ensemble(m, InitialLaw{make_vec({0.0}), 0.0}, o);
  double total = 0;
  for (auto c : r.jump_counts) total += static_cast<double>(c);
  const double mean = total / static_cast<double>(o.n_paths);
  CHECK(std::fabs(mean - 10.0) < 3.0 * std::sqrt(10.0 / 1e5));
}

TEST_CASE("state-dependent rate: jump count matches the forward-equation integral") {
  const auto m = FiniteActivityModel::from_strings(1, {"-x"}, 0.5, "1 + 0.5*tanh(x)", JumpSizeDensity::bump(1, 0.8));
  const double eps = 1e-3;
  const Vec x0 = make_vec({0.5});

  SpatialGrid g{1, make_vec({-4.0}), make_vec({4.0}), 800};
  FpeOptions fo;
  fo.T = 1.0;
  fo.steps = 2000;
  fo.store_every = 10;
  const auto field = solve_levy_fpe(m, x0, eps, g, fo);
  const double oracle = expected_jump_count(field, m);

  EnsembleOptions o;
  o.n_paths = 100000;
  o.n_steps = 400;
  o.T = 1.0;
  o.lambda_bar = 1.5;
  o.snapshot_times = {1.0};
  o.seed = 8;
  const auto r = simulate_jump_ensemble(m, InitialLaw{x0, eps}, o);
  double total = 0;
  for (auto c : r.jump_counts) total += static_cast<double>(c);
  const double mean = total / static_cast<double>(o.n_paths);
  CHECK(std::fabs(mean - oracle) / oracle < 0.02);
}

TEST_CASE("thinning bound violations are reported") {
  const auto m = model("0", 0.1, "1 + x^2");
  CHECK_THROWS_AS(simulate_jump_diffusion(m, make_vec({2.0}), 1.0, 100, 1.5, 1), Error);
  // Zero λ̄ with positive λ would silently drop jumps; it must fail instead.
  CHECK_THROWS_AS(simulate_jump_diffusion(model("0", 0.1, "1"), make_vec({0.0}), 1.0, 100, 0.0, 1), Error);
}

TEST_CASE("bump samples respect support and symmetry") {
  const auto b = JumpSizeDensity::bump(1, 1.0);
  Engine e = make_engine(5, 0, channel::jumps);
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  bool inside = true;
  for (int i = 0; i < n; ++i) {
    const double z = sample_jump(b, e)(0);
    inside = inside && std::fabs(z) <= 1.0;
    sum += z;
    sq += z * z;
  }
  CHECK(inside);
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::fabs(mean) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated Gaussian samples pass KS against a quadrature CDF") {
  const auto g = JumpSizeDensity::truncated_gaussian(1, 0.5, 1.0);
  // Tabulated CDF by adaptive quadrature on 4000 cells, linear in between.
  const int cells = 4000;
  std::vector<double> cdf(cells + 1, 0.0);
  for (int i = 0; i < cells; ++i) {
    const double a = -1.0 + 2.0 * i / cells, b = -1.0 + 2.0 * (i + 1) / cells;
    cdf[i + 1] = cdf[i] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                              [&](double z) { return g(make_vec({z})); }, a, b);
  }
  auto F = [&](double z) {
    const double s = (z + 1.0) / 2.0 * cells;
    const int i = std::clamp(static_cast<int>(s), 0, cells - 1);
    return cdf[i] + (s - i) * (cdf[i + 1] - cdf[i]);
  };
  Engine e = make_engine(6, 0, channel::jumps);
  const int n = 1000000;
  std::vector<double> z(n);
  for (auto& v : z) v = sample_jump(g, e)(0);
  std::sort(z.begin(), z.end());
  double D = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = F(z[i]);
    D = std::max({D, std::fabs(f - static_cast<double>(i) / n), std::fabs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(D < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("streams are reproducible and independent of the thread count") {
  const auto m = model("-x", 0.7, "1", 0.8);
  const auto a = simulate_jump_diffusion(m, make_vec({0.0}), 1.0, 200, 1.0, 42, 3);
  const auto b = simulate_jump_diffusion(m, make_vec({0.0}), 1.0, 200, 1.0, 42, 3);
  const auto c = simulate_jump_diffusion(m, make_vec({0.0}), 1.0, 200, 1.0, 42, 4);
  CHECK((a.x.array() == b.x.array()).all());
  CHECK_FALSE((a.x.array() == c.x.array()).all());

  EnsembleOptions o;
  o.n_paths = 2000;
  o.n_steps = 100;
  o.T = 1.0;
  o.lambda_bar = 1.0;
  o.snapshot_times = {0.5, 1.0};
  o.seed = 9;
  o.threads = 1;
  const auto r1 = simulate_jump_ensemble(m, InitialLaw{make_vec({0.0}), 1e-3}, o);
  o.threads = 4;
  const auto r4 = simulate_jump_ensemble(m, InitialLaw{make_vec({0.0}), 1e-3}, o);
  for (std::size_t k = 0; k < 2; ++k) CHECK((r1.snapshots[k].array() == r4.snapshots[k].array()).all());
  CHECK(r1.jump_counts == r4.jump_counts);
}

TEST_CASE("off-grid snapshot times are rejected") {
  CHECK_THROWS_AS(snapshot_indices({0.333}, 1.0, 10), Error);
  CHECK(snapshot_indices({0.3, 1.0}, 1.0, 10) == std::vector<std::size_t>{3, 10});
}

TEST_CASE("2D paths") {
  const auto m = FiniteActivityModel::from_strings(2, {"-x1", "-x2"}, 0.5, "1", JumpSizeDensity::bump(2, 0.5));
  const auto p = simulate_jump_diffusion(m, make_vec({0.1, -0.1}), 1.0, 100, 1.0, 3);
  CHECK(p.dim() == 2);
  CHECK(p.steps() == 100);
  for (const auto& j : p.jumps) CHECK(j.jump.norm() < 0.5);
}
