#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumpom/models.hpp"
#include "jumpom/om.hpp"
#include "jumpom/sde_sim.hpp"

namespace jumpom {

enum class StepRule {
  sobolev,   // gradient taken in the discrete H¹ metric of the kinetic term
  steepest,  // plain Euclidean gradient
};

struct OptimizerOptions {
  std::size_t max_iters = 5000;
  double grad_tol = 1e-8;  // on max_i |∂S/∂x_i| / Δt
  StepRule step_rule = StepRule::sobolev;
  double armijo_c = 1e-4;
  double initial_step = 1.0;
  int max_backtracks = 60;
};

struct MapProblem {
  Vec x0;
  Vec xT;
  double T = 1.0;
  std::size_t n_knots = 101;  // including both endpoints
  OptimizerOptions optimizer;
  JumpQuadratureSpec jump_quadrature;
  /// Constant added to the divergence integrand; moves the action by shift·T.
  double action_shift = 0.0;
  int threads = 1;
};

/// Midpoint-rule discretization of the OM action over uniform knots:
///   Σ Δt [ |Δx/Δt - b - ℓ_J|²/(2σ²) + ½∇·(b + ℓ_J) + ½ℓ̃_J ] at x̄_i = (x_i + x_{i-1})/2.
class DiscreteAction {
 public:
  DiscreteAction(const FiniteActivityModel& model, double T, JumpQuadratureSpec spec = {}, double action_shift = 0.0,
                 int threads = 1);

  /// knots: (n+1) × d, rows are x_0 .. x_n.
  double value(const Eigen::MatrixXd& knots) const;
  /// Value plus gradient with respect to the interior knots (rows 1 .. n-1;
  /// rows 0 and n of `gradient` are zero).
  double value_and_gradient(const Eigen::MatrixXd& knots, Eigen::MatrixXd& gradient) const;

  const FiniteActivityModel& model() const noexcept { return model_; }
  double horizon() const noexcept { return T_; }

 private:
  const FiniteActivityModel& model_;
  double T_;
  JumpCorrection jump_;
  double shift_;
  int threads_;
};

double discretize_action(const FiniteActivityModel& model, const DiscretePath& knots, JumpQuadratureSpec spec = {});
Eigen::MatrixXd action_gradient(const FiniteActivityModel& model, const DiscretePath& knots,
                                JumpQuadratureSpec spec = {});

struct MapResult {
  DiscretePath path;
  double action = 0.0;
  double initial_action = 0.0;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool descent_held = true;             // every accepted step lowered the action
  std::vector<double> action_history;   // action after each iteration, starting with the initial one
  std::string message;

  nlohmann::json report() const;
};

/// Straight line from x0 to xT on the knot grid.
DiscretePath linear_knots(const Vec& x0, const Vec& xT, double T, std::size_t n_knots);

/// Gradient descent with Armijo backtracking from `init` (or the straight line).
MapResult minimize_action(const FiniteActivityModel& model, const MapProblem& problem,
                          const DiscretePath* init = nullptr);

}  // namespace jumpom
