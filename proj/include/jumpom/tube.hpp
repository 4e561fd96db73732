#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumpom/models.hpp"
#include "jumpom/om.hpp"
#include "jumpom/statistics.hpp"

namespace jumpom {

struct TubeEstimate {
  double delta = 0.0;
  std::size_t n_paths = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  Interval ci95;
  double dt = 0.0;
  std::string warning;
};

struct TubeOptions {
  std::size_t n_paths = 100000;
  std::size_t n_steps = 1000;
  double lambda_bar = 0.0;  // thinning bound; 0 is allowed only for λ ≡ 0
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Per-path sup_i |x_i - ψ(t_i)| over the uniform time grid, for jump-diffusion
/// paths from ψ(0). Paths are abandoned (value +inf) once they leave the
/// widest tube of interest, `cutoff`.
std::vector<double> tube_deviations(const FiniteActivityModel& model, const SmoothPath& path, double cutoff,
                                    const TubeOptions& options);

/// Tube estimate from precomputed deviations: hit iff deviation ≤ δ.
TubeEstimate tube_estimate_from(const std::vector<double>& deviations, double delta, double dt);

/// P(sup_t |X_t - ψ_t| ≤ δ) by Monte Carlo with the sup taken on the simulation
/// grid. Requires σ √Δt ≤ δ/4.
TubeEstimate estimate_tube_probability(const FiniteActivityModel& model, const SmoothPath& path, double delta,
                                       const TubeOptions& options);

/// Same paths evaluated for several radii, so estimates are nested.
std::vector<TubeEstimate> estimate_tube_probabilities(const FiniteActivityModel& model, const SmoothPath& path,
                                                      const std::vector<double>& deltas, const TubeOptions& options);

struct RatioRow {
  double delta = 0.0;
  TubeEstimate tube1;
  TubeEstimate tube2;
  double log_ratio = 0.0;     // ln(p̂1 / p̂2), NaN if either has no hits
  double log_ratio_se = 0.0;  // delta method, independent tubes
  Interval log_ratio_ci;
  double action_difference = 0.0;  // S(ψ2) - S(ψ1)
  double gap = 0.0;                // |log_ratio - ΔS|
  bool action_in_ci = false;
};

struct RatioExperiment {
  std::vector<RatioRow> rows;
  OmEvaluation action1;
  OmEvaluation action2;

  /// Gap non-increasing as δ shrinks, allowing each step to rise by at most
  /// 1.96 × the combined standard error of the two log ratios.
  bool gap_trend_non_increasing() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Runs both tubes on independent random streams and compares ln(p̂1/p̂2)
/// with the OM action difference.
RatioExperiment om_ratio_experiment(const FiniteActivityModel& model, const SmoothPath& psi1, const SmoothPath& psi2,
                                    const std::vector<double>& deltas, const TubeOptions& options,
                                    const OmQuadrature& quad = {});

}  // namespace jumpom
