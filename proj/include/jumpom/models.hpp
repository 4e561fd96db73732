#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumpom/core.hpp"
#include "jumpom/expr.hpp"

namespace jumpom {

enum class JumpFamily { bump, truncated_gaussian };

/// Jump-size density ν_J with bounded support in [-a, a]^d and ν_J(0) > 0.
///
/// bump: c·exp(-1 / (1 - |z/a|^2)) on the open ball |z| < a (radial in 2D).
/// truncated_gaussian: c·exp(-|z - m|^2 / (2 s^2)) on the box [-a, a]^d, with
/// the shift m strictly inside the box so that ν_J(0) > 0.
/// The normalization constant c is fixed at construction.
class JumpSizeDensity {
 public:
  static JumpSizeDensity bump(int dim, double radius);
  static JumpSizeDensity truncated_gaussian(int dim, double scale, double radius, std::optional<Vec> mean = std::nullopt);

  int dim() const noexcept { return dim_; }
  JumpFamily family() const noexcept { return family_; }
  double radius() const noexcept { return radius_; }
  double scale() const noexcept { return scale_; }
  const Vec& mean() const noexcept { return mean_; }
  double normalization() const noexcept { return norm_; }

  bool in_support(const Vec& z) const;
  double operator()(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  double at_zero() const { return (*this)(Vec::Zero(dim_)); }
  /// Upper bound of the density, used as the rejection envelope.
  double max_value() const noexcept { return max_value_; }

  /// ∫ν_J over its support by an independent tensor Gauss–Legendre rule.
  double audit_integral(int panels_per_dim = 64, int order = 12) const;

  nlohmann::json to_json() const;

 private:
  JumpSizeDensity() = default;

  int dim_ = 1;
  JumpFamily family_ = JumpFamily::bump;
  double radius_ = 1.0;
  double scale_ = 1.0;
  Vec mean_;
  double norm_ = 1.0;
  double max_value_ = 1.0;
};

/// Tensor Gauss–Legendre rule over the support box of ν_J. Nodes where the
/// density vanishes are dropped; `density` caches ν_J at each node.
struct SupportRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;
  std::vector<double> density;

  std::size_t size() const noexcept { return nodes.size(); }
};

SupportRule support_rule(const JumpSizeDensity& density, int nodes_per_dim = 64, int panels = 1);

/// dX = b(X) dt + σ dB + J dN with state-dependent jump rate λ(X_{t-}) and J ~ ν_J.
/// Fields are expressions in x (d = 1) or x1, x2 (d = 2); all first and second
/// derivatives needed downstream are prepared symbolically at construction.
class FiniteActivityModel {
 public:
  FiniteActivityModel(int dim, std::vector<Expr> drift, double sigma, Expr rate, JumpSizeDensity jump);

  static FiniteActivityModel from_strings(int dim, const std::vector<std::string>& drift, double sigma,
                                          const std::string& rate, JumpSizeDensity jump);
  static std::vector<std::string> state_variables(int dim);

  int dim() const noexcept { return dim_; }
  double sigma() const noexcept { return sigma_; }
  const JumpSizeDensity& jump() const noexcept { return jump_; }
  const std::vector<Expr>& drift_expressions() const noexcept { return drift_; }
  const Expr& rate_expression() const noexcept { return rate_; }

  Vec drift(const Vec& x) const;
  Mat drift_jacobian(const Vec& x) const;
  double drift_divergence(const Vec& x) const;
  Vec drift_divergence_gradient(const Vec& x) const;

  double rate(const Vec& x) const { return rate_(x); }
  Vec rate_gradient(const Vec& x) const;
  Mat rate_hessian(const Vec& x) const;
  bool rate_is_constant() const noexcept { return rate_.is_constant(); }

  /// Same drift, noise and jump density with the rate multiplied by `factor`.
  FiniteActivityModel with_scaled_rate(double factor) const;
  /// Same model with a different rate expression.
  FiniteActivityModel with_rate(const Expr& rate) const;

  nlohmann::json to_json() const;

 private:
  int dim_;
  std::vector<Expr> drift_;
  double sigma_;
  Expr rate_;
  JumpSizeDensity jump_;

  std::vector<Expr> drift_jac_;      // row-major d×d
  Expr divergence_;
  std::vector<Expr> divergence_grad_;
  std::vector<Expr> rate_grad_;
  std::vector<Expr> rate_hess_;      // row-major d×d
};

/// Scalar jump-diffusion with generator
///   b f' + σ²/2 f'' + ∫ (f(x + F(x,z)) - f(x) - 1{|z|<1} F(x,z) f'(x)) ν(x,z) dz.
/// ν is kept as a callable so finite-activity models can be embedded (ν = λ ν_J).
class InfiniteActivityModel {
 public:
  using Intensity = std::function<double(double x, double z)>;

  static InfiniteActivityModel from_expressions(const std::string& drift, double sigma, const std::string& jump_map,
                                                const std::string& intensity, const std::string& dominating,
                                                double alpha);
  /// F(x,z) = z, ν(x,z) = λ(x) ν_J(z). The drift absorbs the small-jump
  /// compensator so that the embedded process has the same law as `model`.
  static InfiniteActivityModel embed(const FiniteActivityModel& model);

  double sigma() const noexcept { return sigma_; }
  double alpha() const noexcept { return alpha_; }
  bool has_dominating() const noexcept { return dominating_.has_value(); }
  bool is_embedded() const noexcept { return embedded_; }
  /// Extent of the jump-size support, +inf for genuinely infinite-activity models.
  double support_radius() const noexcept { return support_radius_; }

  double drift(double x) const { return drift_({x}); }
  double drift_derivative(double x) const { return drift_dx_({x}); }
  double jump_map(double x, double z) const { return F_({x, z}); }
  double jump_map_dx(double x, double z) const { return F_dx_({x, z}); }
  double jump_map_dz(double x, double z) const { return F_dz_({x, z}); }
  double intensity(double x, double z) const { return nu_(x, z); }
  double dominating(double z) const;

  const Expr& jump_map_expression() const noexcept { return F_; }
  nlohmann::json to_json() const;

 private:
  InfiniteActivityModel() = default;

  Expr drift_;
  Expr drift_dx_;
  double sigma_ = 1.0;
  Expr F_;
  Expr F_dx_;
  Expr F_dz_;
  Intensity nu_;
  std::optional<Expr> dominating_;
  double alpha_ = 1.0;
  bool embedded_ = false;
  double support_radius_ = std::numeric_limits<double>::infinity();
  std::string intensity_text_;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = true;
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<double> witness;  // grid point of the extreme / offending value
  std::string detail;
};

struct ValidationReport {
  std::string model_kind;
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

struct Box {
  Vec lo;
  Vec hi;
  int resolution = 101;  // nodes per dimension, endpoints included
};

struct FiniteValidationOptions {
  /// Accept λ = 0 on the grid (degenerate diffusion-only tests).
  bool allow_zero_rate = false;
};

ValidationReport validate_finite_model(const FiniteActivityModel& model, const Box& grid,
                                       const FiniteValidationOptions& options = {});

struct InfiniteValidationGrid {
  double x_lo = -3.0;
  double x_hi = 3.0;
  int x_nodes = 61;
  double z_inner = 0.05;  // annulus |z| in [z_inner, z_outer] for the domination and jump-map checks
  double z_outer = 3.0;
  int z_nodes = 60;
  double band_lo = 1e-4;  // near-zero band |z| in [band_lo, band_hi] for the power-law checks
  double band_hi = 1e-2;
  int band_nodes = 40;
};

ValidationReport validate_infinite_model(const InfiniteActivityModel& model, const InfiniteValidationGrid& grid,
                                         double eta);

}  // namespace jumpom
