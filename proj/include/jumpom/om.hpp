#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumpom/core.hpp"
#include "jumpom/expr.hpp"
#include "jumpom/models.hpp"

namespace jumpom {

struct JumpQuadratureSpec {
  int theta_nodes = 16;
  int z_nodes = 64;  // per dimension
  int z_panels = 1;
};

/// ℓ_J, ℓ̃_J and their x-derivatives at one point.
struct JumpTerms {
  Vec ell;
  double div_ell = 0.0;
  double ell_tilde = 0.0;
  // Filled only when derivatives are requested.
  Mat ell_jacobian;   // ∂ℓ_i/∂x_j
  Vec grad_div_ell;
  Vec grad_ell_tilde;
};

/// Precomputed (θ, z) rule for the jump correction terms
///   ℓ_J(x)  = ∫ z ∫_0^1 λ(x-θz) ν_J(-θz)/ν_J(0) dθ ν_J(dz)
///   ℓ̃_J(x) = ∫ z·∫_0^1 λ(x-θz) [∇ν_J(-θz) ν_J(0) - ν_J(-θz) ∇ν_J(0)] / ν_J(0)² dθ ν_J(dz).
/// Only λ depends on x, so the remaining factors are folded into two weights
/// per node. Derivatives in x act on λ alone and use its symbolic gradient
/// and Hessian.
class JumpCorrection {
 public:
  explicit JumpCorrection(const FiniteActivityModel& model, JumpQuadratureSpec spec = {});

  JumpTerms operator()(const Vec& x, bool with_derivatives = false) const;
  Vec ell(const Vec& x) const { return (*this)(x).ell; }
  double ell_tilde(const Vec& x) const { return (*this)(x).ell_tilde; }
  std::size_t nodes() const noexcept { return shift_.size(); }

 private:
  const FiniteActivityModel* model_;
  std::vector<Vec> shift_;        // θ z
  std::vector<Vec> ell_weight_;   // w · ν_J(-θz)/ν_J(0) · z
  std::vector<double> tilde_weight_;
  // Constant-rate shortcut: sums of the weights.
  Vec ell_sum_;
  double tilde_sum_ = 0.0;
};

Vec ell_J(const FiniteActivityModel& model, const Vec& x, JumpQuadratureSpec spec = {});
double ell_tilde_J(const FiniteActivityModel& model, const Vec& x, JumpQuadratureSpec spec = {});

/// C² path ψ : [0, T] → R^d given by expressions in t.
class SmoothPath {
 public:
  SmoothPath(std::vector<Expr> components, double T);
  static SmoothPath parse(const std::vector<std::string>& components, double T);

  int dim() const noexcept { return static_cast<int>(components_.size()); }
  double horizon() const noexcept { return T_; }
  Vec value(double t) const;
  Vec velocity(double t) const;
  Vec start() const { return value(0.0); }
  std::vector<std::string> to_strings() const;

 private:
  std::vector<Expr> components_;
  std::vector<Expr> derivatives_;
  double T_;
};

struct OmQuadrature {
  int t_panels = 256;
  int t_order = 4;  // Gauss–Legendre nodes per panel
  JumpQuadratureSpec jump;
  /// Relative panel-halving difference above which a warning is attached.
  double error_threshold = 1e-8;
};

struct OmEvaluation {
  double total = 0.0;
  double kinetic = 0.0;     // ∫ |ψ̇ - b - ℓ_J|² / (2σ²)
  double divergence = 0.0;  // ½ ∫ ∇·(b + ℓ_J)
  double ell_tilde = 0.0;   // ½ ∫ ℓ̃_J
  int t_panels = 0;
  int t_order = 0;
  std::size_t jump_nodes = 0;
  double estimated_error = 0.0;  // |S(panels) - S(panels/2)|
  std::string warning;

  nlohmann::json to_json() const;
};

/// Per-time integrand pieces; shared by the continuous and discrete actions.
struct OmIntegrand {
  double kinetic = 0.0;
  double divergence = 0.0;
  double ell_tilde = 0.0;
};

OmIntegrand om_integrand(const Vec& velocity, const Vec& drift, double div_drift, const JumpTerms& jump,
                         double sigma);

/// OM action of the jump-diffusion along ψ over [t0, t1] (default [0, T]).
OmEvaluation om_action(const FiniteActivityModel& model, const SmoothPath& path, const OmQuadrature& quad = {},
                       double t0 = 0.0, double t1 = -1.0);

/// Classical ½∫ |ψ̇ - b|²/σ² + ∇·b. Uses the same integrand code as om_action
/// with the jump terms set to zero, so the two agree bit for bit at λ = 0.
OmEvaluation classical_om_action(const std::vector<Expr>& drift, double sigma, const SmoothPath& path,
                                 const OmQuadrature& quad = {}, double t0 = 0.0, double t1 = -1.0);

}  // namespace jumpom
