#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumpom/models.hpp"
#include "jumpom/sde_sim.hpp"

namespace jumpom {

/// x ↦ x + θ F(x, z) for fixed θ ∈ [0, 1] and z ≠ 0.
class TransportMap {
 public:
  TransportMap(const InfiniteActivityModel& model, double theta, double z, double tol = 1e-12, int max_iter = 50);

  double forward(double y) const;
  /// Newton from y0 = x - θF(x, z), bisection fallback on an expanding bracket.
  double inverse(double x) const;
  /// |d T⁻¹/dx| = 1 / |1 + θ ∂₁F(T⁻¹(x), z)|.
  double jacobian(double x) const;
  double jacobian_at_preimage(double y) const;

 private:
  const InfiniteActivityModel& model_;
  double theta_;
  double z_;
  double tol_;
  int max_iter_;
};

double invert_transport(const TransportMap& map, double x);

struct NuFValue {
  double value = 0.0;
  double z_star = 0.0;
  bool out_of_range = false;  // u is not in the range of F(y, ·)
};

/// ν_F(y, u) = ν(y, z*) / |∂₂F(y, z*)| with F(y, z*) = u, u ≠ 0.
NuFValue nu_F(const InfiniteActivityModel& model, double y, double u);

struct DomQuadrature {
  double z_cutoff = 1e-4;  // |z| below this is dropped
  double z_max = 0.0;      // 0 picks the support radius of ν, or 10 if unbounded
  int z_panels = 40;       // geometric panels per sign of z
  int z_order = 8;
  int theta_nodes = 16;
  double fd_step = 1e-5;
  int threads = 1;
};

struct DomStep {
  double residual = 0.0;       // Δx/Δt - b + ∫_{|z|<1} Fν - NL
  double kinetic = 0.0;        // residual² Δt / (2σ²)
  double divergence = 0.0;     // ½ Δt d/dx(b - ∫_{|z|<1} Fν + NL)
  double nonlocal = 0.0;       // NL(x_i; x_{i-1})
};

struct DomEvaluation {
  double total = 0.0;
  double kinetic = 0.0;
  double divergence = 0.0;
  std::size_t n = 0;
  double dt = 0.0;
  std::size_t excluded_nodes = 0;   // quadrature nodes with T⁻¹(x_i) - x_{i-1} = 0 exactly
  double excluded_measure = 0.0;    // their total θ-z quadrature weight
  double omitted_small_jump = 0.0;  // bound on ∫_{|z|<cutoff} z² ν
  /// Largest relative change of NL at the first, middle and last step when
  /// the θ and z rules are both refined by a factor 2.
  double quadrature_sensitivity = 0.0;
  std::string warning;
  std::vector<DomStep> steps;

  nlohmann::json to_json() const;
};

/// Discrete OM functional of the scalar infinite-activity model along the
/// knots x_0 .. x_n with uniform step dt:
///   Σ |Δx/Δt - b(x_i) + ∫_{|z|<1} F ν - NL(x_i; x_{i-1})|² Δt / (2σ²)
///     + ½ Σ Δt d/dx [ b - ∫_{|z|<1} F ν + NL(·; x_{i-1}) ](x_i),
///   NL(x; y) = ∫_0^1 ∫ F(T⁻¹x, z) |J| ν_F(y, T⁻¹x - y) / ν_F(y, x - y) ν(T⁻¹x, z) dz dθ.
/// b' is symbolic; the z-integral terms are differentiated by central differences.
DomEvaluation discrete_om_action(const InfiniteActivityModel& model, const std::vector<double>& x, double dt,
                                 const DomQuadrature& quad = {});
DomEvaluation discrete_om_action(const InfiniteActivityModel& model, const DiscretePath& path,
                                 const DomQuadrature& quad = {});

/// NL(x; y) on the given quadrature; exposed for tests.
double nonlocal_drift(const InfiniteActivityModel& model, double x, double y, const DomQuadrature& quad = {});

}  // namespace jumpom
