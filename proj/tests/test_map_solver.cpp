#include <doctest.h>

#include <cmath>

#include "jumpom/map_solver.hpp"

using namespace jumpom;

namespace {

// Minimizer of ∫ (ẋ + x)² dt with fixed ends solves ẍ = x.
double ou_map(double x0, double xT, double T, double t) {
  return (x0 * std::sinh(T - t) + xT * std::sinh(t)) / std::sinh(T);
}

}  // namespace

TEST_CASE("OU minimizer matches the Euler-Lagrange solution") {
  const auto m = FiniteActivityModel::from_strings(1, {"-x"}, 0.6, "0", JumpSizeDensity::bump(1, 0.5));
  MapProblem p;
  p.x0 = make_vec({-1.0});
  p.xT = make_vec({1.0});
  p.T = 2.0;
  p.n_knots = 200;
  const auto r = minimize_action(m, p);
  CHECK(r.converged);
  CHECK(r.descent_held);
  double err = 0.0;
  for (std::size_t i = 0; i < r.path.t.size(); ++i)
    err = std::max(err, std::fabs(r.path.x(static_cast<Eigen::Index>(i), 0) - ou_map(-1.0, 1.0, 2.0, r.path.t[i])));
  CHECK(err < 1e-3);
  for (std::size_t k = 1; k < r.action_history.size(); ++k) CHECK(r.action_history[k] <= r.action_history[k - 1]);
  CHECK(r.action <= r.initial_action);
  CHECK(r.report()["converged"] == true);
}

TEST_CASE("analytic gradient against central differences") {
  const auto m = FiniteActivityModel::from_strings(2, {"-x1 + 0.3*x2^2", "-x2 + sin(x1)"}, 0.8,
                                                   "1 + 0.5*tanh(x1 - x2)", JumpSizeDensity::bump(2, 0.5));
  DiscretePath knots = linear_knots(make_vec({-0.5, 0.2}), make_vec({0.7, -0.4}), 1.0, 30);
  for (std::size_t i = 1; i + 1 < knots.t.size(); ++i) {
    knots.x(static_cast<Eigen::Index>(i), 0) += 0.2 * std::sin(3.0 * knots.t[i]);
    knots.x(static_cast<Eigen::Index>(i), 1) += 0.1 * std::cos(5.0 * knots.t[i]);
  }
  const Eigen::MatrixXd g = action_gradient(m, knots);
  CHECK(g.row(0).norm() == 0.0);
  CHECK(g.row(g.rows() - 1).norm() == 0.0);
  const double h = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < knots.x.rows(); ++i)
    for (Eigen::Index k = 0; k < 2; ++k) {
      DiscretePath up = knots, down = knots;
      up.x(i, k) += h;
      down.x(i, k) -= h;
      const double fd = (discretize_action(m, up) - discretize_action(m, down)) / (2 * h);
      worst = std::max(worst, std::fabs(g(i, k) - fd) / std::max(std::fabs(fd), 1e-3));
    }
  CHECK(worst < 1e-5);
}

TEST_CASE("state-dependent rate bends the path and both step rules agree") {
  const auto m = FiniteActivityModel::from_strings(1, {"-x"}, 0.7, "1 + 0.8*tanh(2*x)", JumpSizeDensity::bump(1, 0.8));
  MapProblem p;
  p.x0 = make_vec({-0.5});
  p.xT = make_vec({0.5});
  p.T = 1.0;
  p.n_knots = 21;
  p.jump_quadrature = {8, 16, 1};
  const auto sob = minimize_action(m, p);
  INFO(sob.message, " iters ", sob.iterations);
  REQUIRE(sob.converged);
  CHECK(sob.action < sob.initial_action);

  p.optimizer.step_rule = StepRule::steepest;
  p.optimizer.max_iters = 20000;
  p.optimizer.grad_tol = 1e-5;  // plain gradient steps crawl along the smooth modes
  const auto st = minimize_action(m, p);
  INFO(st.message, " iters ", st.iterations, " grad ", st.grad_norm);
  REQUIRE(st.converged);
  CHECK(st.action == doctest::Approx(sob.action).epsilon(1e-8));
  CHECK((st.path.x - sob.path.x).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(sob.iterations < st.iterations);
}

TEST_CASE("shift moves the action by shift times T and threads do not change it") {
  const auto m = FiniteActivityModel::from_strings(1, {"-x + 0.2*x^3"}, 0.9, "1 + 0.3*sin(x)",
                                                   JumpSizeDensity::bump(1, 0.6));
  const DiscretePath k = linear_knots(make_vec({0.0}), make_vec({1.0}), 1.5, 51);
  const DiscreteAction a(m, 1.5), b(m, 1.5, {}, 2.0), c(m, 1.5, {}, 0.0, 4);
  CHECK(b.value(k.x) - a.value(k.x) == doctest::Approx(3.0).epsilon(1e-12));
  Eigen::MatrixXd ga, gc;
  CHECK(a.value_and_gradient(k.x, ga) == c.value_and_gradient(k.x, gc));
  CHECK((ga.array() == gc.array()).all());
}

TEST_CASE("non-convergence is reported") {
  const auto m = FiniteActivityModel::from_strings(1, {"-x"}, 0.5, "0", JumpSizeDensity::bump(1, 0.5));
  MapProblem p;
  p.x0 = make_vec({0.0});
  p.xT = make_vec({2.0});
  p.n_knots = 101;
  p.optimizer.max_iters = 2;
  const auto r = minimize_action(m, p);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.message.empty());
  CHECK(r.iterations <= 2);
}

TEST_CASE("bad problems") {
  const auto m = FiniteActivityModel::from_strings(1, {"-x"}, 0.5, "0", JumpSizeDensity::bump(1, 0.5));
  MapProblem p;
  p.x0 = make_vec({0.0});
  p.xT = make_vec({1.0, 2.0});
  CHECK_THROWS_AS(minimize_action(m, p), Error);
  p.xT = make_vec({1.0});
  p.n_knots = 2;
  CHECK_THROWS_AS(minimize_action(m, p), Error);
  CHECK_THROWS_AS(DiscreteAction(m, 0.0), Error);
}
