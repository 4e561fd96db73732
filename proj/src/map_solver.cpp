#include "jumpom/map_solver.hpp"

#include <cmath>
#include <sstream>

namespace jumpom {

DiscreteAction::DiscreteAction(const FiniteActivityModel& model, double T, JumpQuadratureSpec spec,
                               double action_shift, int threads)
    : model_(model), T_(T), jump_(model, spec), shift_(action_shift), threads_(threads) {
  if (!(T > 0.0)) throw Error(ErrorKind::input, "map_solver", "horizon must be positive");
  if (!(model.sigma() > 0.0)) throw Error(ErrorKind::validation, "map_solver", "action needs sigma > 0");
}

double DiscreteAction::value(const Eigen::MatrixXd& knots) const {
  const auto n = static_cast<std::size_t>(knots.rows() - 1);
  if (knots.rows() < 2 || knots.cols() != model_.dim())
    throw Error(ErrorKind::input, "map_solver", "knot matrix has the wrong shape");
  const double dt = T_ / static_cast<double>(n);
  std::vector<double> terms(n);
  parallel_for(n, threads_, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k + 1);
    const Vec a = knots.row(i - 1).transpose();
    const Vec b = knots.row(i).transpose();
    const Vec mid = 0.5 * (a + b);
    const OmIntegrand f = om_integrand((b - a) / dt, model_.drift(mid), model_.drift_divergence(mid), jump_(mid),
                                       model_.sigma());
    terms[k] = dt * (f.kinetic + f.divergence + f.ell_tilde);
  });
  double sum = 0.0;
  for (double v : terms) sum += v;
  return sum + shift_ * T_;
}

double DiscreteAction::value_and_gradient(const Eigen::MatrixXd& knots, Eigen::MatrixXd& gradient) const {
  const auto n = static_cast<std::size_t>(knots.rows() - 1);
  if (knots.rows() < 3 || knots.cols() != model_.dim())
    throw Error(ErrorKind::input, "map_solver", "need at least three knots of the model dimension");
  const int d = model_.dim();
  const double dt = T_ / static_cast<double>(n);
  const double s2 = model_.sigma() * model_.sigma();

  // Per interval: value, residual r, (J_b + J_ℓ)^T r and ∇ of the potential term.
  std::vector<double> terms(n);
  std::vector<Vec> residual(n), pulled(n), grad_pot(n);
  parallel_for(n, threads_, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k + 1);
    const Vec a = knots.row(i - 1).transpose();
    const Vec b = knots.row(i).transpose();
    const Vec mid = 0.5 * (a + b);
    const JumpTerms jt = jump_(mid, true);
    const Vec drift = model_.drift(mid);
    const OmIntegrand f = om_integrand((b - a) / dt, drift, model_.drift_divergence(mid), jt, model_.sigma());
    terms[k] = dt * (f.kinetic + f.divergence + f.ell_tilde);
    const Vec r = (b - a) / dt - drift - jt.ell;
    const Mat G = model_.drift_jacobian(mid) + jt.ell_jacobian;
    residual[k] = r;
    pulled[k] = G.transpose() * r;
    grad_pot[k] = 0.5 * (model_.drift_divergence_gradient(mid) + jt.grad_div_ell + jt.grad_ell_tilde);
  });

  gradient = Eigen::MatrixXd::Zero(knots.rows(), d);
  for (std::size_t j = 1; j < n; ++j) {
    // Knot j is the right end of interval j-1 and the left end of interval j (0-based intervals).
    const std::size_t L = j - 1;
    const std::size_t R = j;
    const Vec g = (residual[L] - residual[R]) / s2 - (0.5 * dt / s2) * (pulled[L] + pulled[R]) +
                  (0.5 * dt) * (grad_pot[L] + grad_pot[R]);
    gradient.row(static_cast<Eigen::Index>(j)) = g.transpose();
  }
  double sum = 0.0;
  for (double v : terms) sum += v;
  return sum + shift_ * T_;
}

double discretize_action(const FiniteActivityModel& model, const DiscretePath& knots, JumpQuadratureSpec spec) {
  return DiscreteAction(model, knots.horizon(), spec).value(knots.x);
}

Eigen::MatrixXd action_gradient(const FiniteActivityModel& model, const DiscretePath& knots, JumpQuadratureSpec spec) {
  Eigen::MatrixXd g;
  DiscreteAction(model, knots.horizon(), spec).value_and_gradient(knots.x, g);
  return g;
}

DiscretePath linear_knots(const Vec& x0, const Vec& xT, double T, std::size_t n_knots) {
  if (n_knots < 3) throw Error(ErrorKind::input, "map_solver", "need at least three knots");
  if (x0.size() != xT.size()) throw Error(ErrorKind::input, "map_solver", "endpoint dimensions differ");
  DiscretePath path;
  path.t = uniform_time_grid(T, n_knots - 1);
  path.x.resize(static_cast<Eigen::Index>(n_knots), x0.size());
  const double n = static_cast<double>(n_knots - 1);
  for (std::size_t i = 0; i < n_knots; ++i) {
    const double s = static_cast<double>(i) / n;
    path.x.row(static_cast<Eigen::Index>(i)) = ((1.0 - s) * x0 + s * xT).transpose();
  }
  path.x.row(0) = x0.transpose();
  path.x.row(static_cast<Eigen::Index>(n_knots - 1)) = xT.transpose();
  return path;
}

nlohmann::json MapResult::report() const {
  nlohmann::json j;
  j["action"] = action;
  j["initial_action"] = initial_action;
  j["iterations"] = iterations;
  j["grad_norm"] = grad_norm;
  j["converged"] = converged;
  j["descent_held"] = descent_held;
  j["message"] = message;
  return j;
}

namespace {

/// Solves (1/(σ²Δt)) tridiag(-1, 2, -1) y = g on the interior rows, per column.
Eigen::MatrixXd sobolev_direction(const Eigen::MatrixXd& g, double sigma, double dt) {
  const Eigen::Index n = g.rows() - 2;  // interior knots
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  const double scale = 1.0 / (sigma * sigma * dt);
  std::vector<double> cp(static_cast<std::size_t>(n)), dp(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    // Thomas algorithm with a = c = -scale, b = 2 scale.
    double denom = 2.0 * scale;
    cp[0] = -scale / denom;
    dp[0] = g(1, c) / denom;
    for (Eigen::Index i = 1; i < n; ++i) {
      denom = 2.0 * scale + scale * cp[static_cast<std::size_t>(i - 1)];
      cp[static_cast<std::size_t>(i)] = -scale / denom;
      dp[static_cast<std::size_t>(i)] = (g(i + 1, c) + scale * dp[static_cast<std::size_t>(i - 1)]) / denom;
    }
    y(n, c) = dp[static_cast<std::size_t>(n - 1)];
    for (Eigen::Index i = n - 2; i >= 0; --i)
      y(i + 1, c) = dp[static_cast<std::size_t>(i)] - cp[static_cast<std::size_t>(i)] * y(i + 2, c);
  }
  return y;
}

}  // namespace

MapResult minimize_action(const FiniteActivityModel& model, const MapProblem& problem, const DiscretePath* init) {
  if (problem.n_knots < 3) throw Error(ErrorKind::input, "map_solver", "need n_knots >= 3");
  if (problem.x0.size() != model.dim() || problem.xT.size() != model.dim())
    throw Error(ErrorKind::input, "map_solver", "endpoints have the wrong dimension");
  const OptimizerOptions& opt = problem.optimizer;
  const DiscreteAction action(model, problem.T, problem.jump_quadrature, problem.action_shift, problem.threads);
  const double dt = problem.T / static_cast<double>(problem.n_knots - 1);

  MapResult res;
  res.path = init ? *init : linear_knots(problem.x0, problem.xT, problem.T, problem.n_knots);
  if (static_cast<std::size_t>(res.path.x.rows()) != problem.n_knots || res.path.x.cols() != model.dim())
    throw Error(ErrorKind::input, "map_solver", "initial knots do not match n_knots and the model dimension");
  // Endpoints are pinned to the problem data bit for bit.
  res.path.t = uniform_time_grid(problem.T, problem.n_knots - 1);
  res.path.x.row(0) = problem.x0.transpose();
  res.path.x.row(static_cast<Eigen::Index>(problem.n_knots - 1)) = problem.xT.transpose();

  Eigen::MatrixXd& x = res.path.x;
  Eigen::MatrixXd grad;
  double S = action.value_and_gradient(x, grad);
  res.initial_action = S;
  res.action_history.push_back(S);
  auto grad_norm = [&](const Eigen::MatrixXd& g) { return g.cwiseAbs().maxCoeff() / dt; };
  res.grad_norm = grad_norm(grad);

  double step = opt.initial_step;
  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    if (res.grad_norm < opt.grad_tol) {
      res.converged = true;
      break;
    }
    const Eigen::MatrixXd dir =
        opt.step_rule == StepRule::sobolev ? sobolev_direction(grad, model.sigma(), dt) : Eigen::MatrixXd(grad);
    const double slope = (grad.array() * dir.array()).sum();
    bool accepted = false;
    Eigen::MatrixXd trial;
    double S_trial = S;
    double alpha = std::min(opt.initial_step, 2.0 * step);
    for (int b = 0; b <= opt.max_backtracks; ++b, alpha *= 0.5) {
      trial = x - alpha * dir;
      S_trial = action.value(trial);
      if (std::isfinite(S_trial) && S_trial <= S - opt.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.message = "line search failed to satisfy the Armijo condition";
      break;
    }
    step = alpha;
    if (S_trial > S) res.descent_held = false;
    x = trial;
    S = action.value_and_gradient(x, grad);
    res.action_history.push_back(S);
    res.grad_norm = grad_norm(grad);
  }
  if (!res.converged && res.grad_norm < opt.grad_tol) res.converged = true;
  res.action = S;
  if (res.converged) {
    res.message = "converged";
  } else if (res.message.empty()) {
    std::ostringstream os;
    os << "stopped after max_iters=" << opt.max_iters << " with gradient norm " << res.grad_norm;
    res.message = os.str();
  }
  return res;
}

}  // namespace jumpom
