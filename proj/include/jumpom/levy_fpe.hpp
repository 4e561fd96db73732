#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jumpom/core.hpp"
#include "jumpom/models.hpp"

namespace jumpom {

/// Cell-centred uniform grid on [lo, hi]^d with `nodes` cells per dimension.
/// Node i sits at lo + (i + 1/2) h. Flat index is row-major (x1 slowest).
struct SpatialGrid {
  int dim = 1;
  Vec lo;
  Vec hi;
  int nodes = 0;

  double spacing(int k) const { return (hi(k) - lo(k)) / nodes; }
  double cell_volume() const;
  std::size_t size() const;
  Vec node(std::size_t flat) const;
  bool contains(const Vec& x) const;
};

/// Space-time density p_t(x) on a SpatialGrid, stored at selected times.
class DensityField {
 public:
  DensityField(SpatialGrid grid, Vec x0, double epsilon);

  const SpatialGrid& grid() const noexcept { return grid_; }
  const Vec& x0() const noexcept { return x0_; }
  double epsilon() const noexcept { return epsilon_; }
  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t slices() const noexcept { return values_.size(); }
  const Eigen::VectorXd& slice(std::size_t k) const { return values_.at(k); }
  double clipped_mass(std::size_t k) const { return clipped_.at(k); }

  void push_slice(double t, Eigen::VectorXd values, double clipped);

  double mass(std::size_t k) const;
  /// Multilinear interpolation on slice k; cells outside the box count as 0.
  double value(const Vec& x, std::size_t k) const;
  /// Interpolation in space, then linearly in time between stored slices.
  double value(const Vec& x, double t) const;
  /// Index of the slice at time t (exact match up to 1e-9 relative), or throws.
  std::size_t slice_at(double t) const;
  /// Bracketing slices and weight of the upper one for time t.
  void bracket(double t, std::size_t& lower, std::size_t& upper, double& weight) const;
  /// ∇ log p by central differences of the interpolant (step h).
  Vec score(const Vec& x, std::size_t k) const;
  double peak(std::size_t k) const { return values_.at(k).maxCoeff(); }

 private:
  SpatialGrid grid_;
  Vec x0_;
  double epsilon_;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
  std::vector<double> clipped_;
};

enum class JumpScheme {
  grid_convolution,  // exact discrete convolution of λp with the sampled kernel ν_J(kh) h^d (FFT)
  gauss_legendre,    // fixed Gauss–Legendre over the support with multilinear interpolation of λp
};

struct FpeOptions {
  double T = 1.0;
  std::size_t steps = 1000;
  std::size_t store_every = 1;
  double tol_mass = 1e-4;
  JumpScheme jump_scheme = JumpScheme::grid_convolution;
  int gl_nodes = 64;  // per z-dimension, for JumpScheme::gauss_legendre
  int threads = 1;
};

/// Forward Lévy–Fokker–Planck solve from N(x0, ε I) with an absorbing boundary.
///
/// Each step applies an implicit Scharfetter–Gummel drift–diffusion update
/// (exponentially fitted upwinding, an M-matrix, so positivity holds) and then
/// an explicit gain–loss jump update
///   p += dt [ (ν_J * λp)(x) - κ λ(x) p(x) ],   κ = discrete mass of the kernel.
/// Slices are stored every `store_every` steps plus the final one.
DensityField solve_levy_fpe(const FiniteActivityModel& model, const Vec& x0, double epsilon, const SpatialGrid& grid,
                            const FpeOptions& options);

/// Pointwise jump operator ∫ λ(x-z) p(x-z) ν_J(z) dz - λ(x) p(x).
double jump_term_gain_loss(const FiniteActivityModel& model, const std::function<double(const Vec&)>& p,
                           const Vec& x, int nodes_per_dim = 64, int panels = 1);

/// Same operator in the θ-integrated divergence form
///   -∫∫_0^1 z·∇(λp)(x - θz) dθ ν_J(dz).
double jump_term_theta_form(const FiniteActivityModel& model, const std::function<double(const Vec&)>& p,
                            const std::function<Vec(const Vec&)>& grad_p, const Vec& x, int nodes_per_dim = 64,
                            int panels = 1, int theta_nodes = 16);

enum class LimitForm {
  at_source,  // λ(x0) ν_J(x - x0), the correct leading term
  at_target,  // λ(x) ν_J(x - x0), kept as a negative control
};

struct ShortTimeRow {
  double t = 0.0;
  double max_relative_error = 0.0;
  Vec witness;
  std::size_t points = 0;
};

struct ShortTimeReport {
  std::vector<ShortTimeRow> rows;  // ascending in t
  bool monotone = true;            // error increases with t
  std::string warning;
};

/// |p_t(x)/t - λ ν_J(x - x0)| / (λ ν_J(x - x0)) at one point. Rejects points
/// with |x - x0| < band_lo·a, where the Gaussian part of p_t dominates.
double short_time_relative_error(const DensityField& field, const FiniteActivityModel& model, const Vec& x,
                                 std::size_t slice, LimitForm form = LimitForm::at_source, double band_lo = 0.2);

/// Max relative error over grid nodes with |x - x0| in [band_lo·a, band_hi·a],
/// for every stored slice whose time is in `times`.
ShortTimeReport short_time_limit_check(const DensityField& field, const FiniteActivityModel& model,
                                       const std::vector<double>& times, LimitForm form = LimitForm::at_source,
                                       double band_lo = 0.2, double band_hi = 0.9);

/// ∫_0^T ∫ λ(x) p_t(x) dx dt by the trapezoid rule over the stored slices.
double expected_jump_count(const DensityField& field, const FiniteActivityModel& model);

}  // namespace jumpom
