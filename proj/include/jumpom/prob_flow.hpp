#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jumpom/levy_fpe.hpp"
#include "jumpom/models.hpp"
#include "jumpom/sde_sim.hpp"

namespace jumpom {

struct FlowQuadrature {
  int theta_nodes = 16;
  int z_nodes = 64;  // per dimension
  int z_panels = 1;
};

/// Jump part of the probability-flow drift,
///   ∫∫_0^1 z λ(x - θz) p(x - θz) / max(p(x), floor) dθ ν_J(dz),
/// for any density callable.
Vec flow_correction(const FiniteActivityModel& model, const std::function<double(const Vec&)>& density, const Vec& x,
                    double floor, const FlowQuadrature& quad = {});

/// Drift b̂(x, t) = b(x) + correction built on a solved density field.
/// The density floor is floor_relative × peak(p_t).
class FlowDrift {
 public:
  FlowDrift(FiniteActivityModel model, std::shared_ptr<const DensityField> density, double floor_relative = 1e-12,
            FlowQuadrature quad = {});

  const FiniteActivityModel& model() const noexcept { return model_; }
  const DensityField& density() const noexcept { return *density_; }
  std::shared_ptr<const DensityField> density_ptr() const noexcept { return density_; }
  const FlowQuadrature& quadrature() const noexcept { return quad_; }
  double floor_relative() const noexcept { return floor_relative_; }

  /// Direct quadrature on the interpolated density. Throws for x outside the
  /// grid box or t outside the density time range.
  Vec operator()(const Vec& x, double t) const;
  Vec correction(const Vec& x, double t) const;
  double floor(double t) const;
  /// True when p_t(x) is below the floor, so the ratio is capped at x.
  bool floor_active(const Vec& x, double t) const;

 private:
  void check_point(const Vec& x) const;

  FiniteActivityModel model_;
  std::shared_ptr<const DensityField> density_;
  double floor_relative_;
  FlowQuadrature quad_;
  SupportRule rule_;
  std::vector<double> theta_nodes_;
  std::vector<double> theta_weights_;
};

/// Correction tabulated at every grid node and stored slice, so path
/// simulation costs one interpolation per step. Values at the nodes use the
/// same quadrature as FlowDrift with λp interpolated from its grid values.
class FlowDriftTable {
 public:
  explicit FlowDriftTable(const FlowDrift& drift, int threads = 0);

  Vec operator()(const Vec& x, double t) const;
  Vec correction(const Vec& x, double t) const;
  /// sup over nodes and slices of |correction|.
  double sup_correction() const noexcept { return sup_; }
  /// Fraction of (node, slice) pairs where the floor was active.
  double floor_fraction() const noexcept { return floor_fraction_; }
  /// max λ · a · (peak / floor): the bound |correction| cannot exceed.
  double correction_bound() const noexcept { return bound_; }
  const FiniteActivityModel& model() const noexcept { return model_; }
  const SpatialGrid& grid() const noexcept { return density_->grid(); }

 private:
  FiniteActivityModel model_;
  std::shared_ptr<const DensityField> density_;
  std::vector<DensityField> components_;  // tabulated correction, one field per component
  double sup_ = 0.0;
  double floor_fraction_ = 0.0;
  double bound_ = 0.0;
};

struct FlowSimulationOptions {
  std::size_t n_paths = 10000;
  std::size_t n_steps = 1000;
  double T = 1.0;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 0;
  int threads = 0;
  double max_resample_fraction = 0.01;
};

struct FlowSample {
  std::vector<double> snapshot_times;
  std::vector<Eigen::MatrixXd> snapshots;  // n_paths × d per time
  std::size_t resampled = 0;
};

using TimeDrift = std::function<Vec(const Vec& x, double t)>;

/// Euler–Maruyama for dX = drift(X, t) dt + σ dB from `initial`. A path that
/// leaves `box` is redrawn on a fresh substream; more than
/// max_resample_fraction redraws aborts with a numerical error.
FlowSample simulate_flow_sde(const TimeDrift& drift, double sigma, const SpatialGrid& box, const InitialLaw& initial,
                             const FlowSimulationOptions& options);

/// Convenience overload with a tabulated flow drift.
FlowSample simulate_flow_sde(const FlowDriftTable& drift, const InitialLaw& initial, const FlowSimulationOptions& options);

/// Score-based probability-flow ODE drift b - (σ²/2) ∇log p_t, meaningful for λ = 0.
Vec score_flow_drift(const DensityField& field, const FiniteActivityModel& model, const Vec& x, std::size_t slice);

/// Column `component` of a snapshot as a plain vector.
std::vector<double> marginal_component(const Eigen::MatrixXd& snapshot, int component);

}  // namespace jumpom
