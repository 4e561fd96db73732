#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "jumpom/core.hpp"
#include "jumpom/models.hpp"

namespace jumpom {

struct JumpEvent {
  double time;
  Vec jump;
};

/// Sample path on the uniform grid t_i = i T / n. Row i of `x` is the state at t_i.
struct DiscretePath {
  std::vector<double> t;
  Eigen::MatrixXd x;
  std::vector<JumpEvent> jumps;

  int dim() const noexcept { return static_cast<int>(x.cols()); }
  std::size_t steps() const noexcept { return t.empty() ? 0 : t.size() - 1; }
  double horizon() const noexcept { return t.empty() ? 0.0 : t.back(); }
  Vec state(std::size_t i) const { return x.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Uniform grid 0, T/n, ..., T with the last node pinned to T.
std::vector<double> uniform_time_grid(double T, std::size_t n);

using DriftFunction = std::function<Vec(const Vec& x, double t)>;

/// Euler–Maruyama for dX = drift(X,t) dt + sigma dB. `path_index` selects the
/// substream of `seed`, so ensembles can be generated in any order.
DiscretePath simulate_diffusion(const DriftFunction& drift, double sigma, const Vec& x0, double T, std::size_t n,
                                std::uint64_t seed, std::uint64_t path_index = 0);

/// Euler–Maruyama plus thinning for the finite-activity model. `lambda_bar`
/// must bound λ along the path; a violation raises a numerical Error.
DiscretePath simulate_jump_diffusion(const FiniteActivityModel& model, const Vec& x0, double T, std::size_t n,
                                     double lambda_bar, std::uint64_t seed, std::uint64_t path_index = 0);

/// Exact draw from ν_J by rejection from the uniform box [-a, a]^d.
Vec sample_jump(const JumpSizeDensity& density, Engine& engine);
Vec sample_jump(const JumpSizeDensity& density, std::uint64_t seed);

/// Gaussian N(mean, variance I); variance 0 is a point mass.
struct InitialLaw {
  Vec mean;
  double variance = 0.0;

  Vec draw(Engine& engine) const;
};

struct EnsembleOptions {
  std::size_t n_paths = 10000;
  std::size_t n_steps = 1000;
  double T = 1.0;
  double lambda_bar = 0.0;
  std::vector<double> snapshot_times;  // must lie on the time grid
  std::uint64_t seed = 0;
  int threads = 0;
};

struct EnsembleResult {
  std::vector<double> snapshot_times;
  std::vector<Eigen::MatrixXd> snapshots;  // one n_paths × d matrix per time
  std::vector<std::size_t> jump_counts;    // per path
};

/// Independent jump-diffusion paths started from `initial`; keeps only the
/// requested marginals and the per-path jump counts.
EnsembleResult simulate_jump_ensemble(const FiniteActivityModel& model, const InitialLaw& initial,
                                      const EnsembleOptions& options);

/// Grid indices of `times` on the grid T/n; throws if a time is off-grid.
std::vector<std::size_t> snapshot_indices(const std::vector<double>& times, double T, std::size_t n);

namespace detail {

/// Core stepper shared by every simulator.
///
/// Each Euler step draws its full Brownian increment from `noise` first, so a
/// path without accepted jumps is bit-identical to plain Euler–Maruyama on the
/// same stream. Thinning proposals come from a rate-λ̄ clock on `jumps`. A
/// proposal samples a Brownian-bridge point to evaluate the pre-jump state;
/// only accepted proposals split the step and re-anchor the drift.
///
/// Observer interface:
///   bool state(std::size_t i, double t, const Vec& x)  -> false stops the path
///   void jump(double t, const Vec& pre_jump, const Vec& jump)
template <class Drift, class Rate, class Observer>
void step_paths(Drift&& drift, double sigma, Rate&& rate, const JumpSizeDensity* jump_density, double lambda_bar,
                const Vec& x0, double T, std::size_t n, Engine& noise, Engine& jumps, Observer& observer) {
  const int d = static_cast<int>(x0.size());
  const double dt = T / static_cast<double>(n);
  const double sqrt_dt = std::sqrt(dt);
  // One distribution per engine: normal_distribution caches the second value
  // of each generated pair, which would otherwise couple the two streams.
  std::normal_distribution<double> normal(0.0, 1.0);
  std::normal_distribution<double> bridge(0.0, 1.0);
  std::exponential_distribution<double> clock(lambda_bar > 0.0 ? lambda_bar : 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const bool has_jumps = lambda_bar > 0.0 && jump_density != nullptr;

  auto fail = [&](const std::string& what, double t, const Vec& x) {
    std::ostringstream os;
    os << what << " at t=" << t << ", x=(";
    for (int k = 0; k < d; ++k) os << (k ? ", " : "") << x(k);
    os << ")";
    throw Error(ErrorKind::numerical, "sde_sim", os.str());
  };

  Vec x = x0;
  if (jump_density != nullptr && !(rate(x) <= lambda_bar))
    fail("thinning bound violated: lambda=" + std::to_string(rate(x)) + " > lambda_bar", 0.0, x);
  double next_event = has_jumps ? clock(jumps) : std::numeric_limits<double>::infinity();
  if (!observer.state(0, 0.0, x)) return;

  Vec dW(d), anchor_W(d), start_W(d), W_tau(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double t0 = static_cast<double>(i) * dt;
    const double t1 = (i + 1 == n) ? T : static_cast<double>(i + 1) * dt;
    for (int k = 0; k < d; ++k) dW(k) = sqrt_dt * normal(noise);

    // Segment start (moves on accepted jumps) and bridge anchor (moves on every proposal).
    double seg_t = t0;
    Vec seg_x = x;
    Vec seg_b = drift(seg_x, seg_t);
    start_W.setZero();
    double anchor_t = t0;
    anchor_W.setZero();
    bool split = false;

    while (has_jumps && next_event < t1) {
      const double tau = next_event;
      const double span = t1 - anchor_t;
      const double h = tau - anchor_t;
      for (int k = 0; k < d; ++k) {
        const double remaining = dW(k) - anchor_W(k);
        W_tau(k) = anchor_W(k) + (h / span) * remaining + std::sqrt(std::max(0.0, h * (span - h) / span)) * bridge(jumps);
      }
      anchor_t = tau;
      anchor_W = W_tau;
      const Vec pre = seg_x + seg_b * (tau - seg_t) + sigma * (W_tau - start_W);
      const double lam = rate(pre);
      if (!(lam <= lambda_bar)) fail("thinning bound violated: lambda=" + std::to_string(lam) + " > lambda_bar", tau, pre);
      if (uniform(jumps) * lambda_bar < lam) {
        const Vec J = sample_jump(*jump_density, jumps);
        observer.jump(tau, pre, J);
        seg_x = pre + J;
        seg_t = tau;
        seg_b = drift(seg_x, seg_t);
        start_W = W_tau;
        split = true;
      }
      next_event += clock(jumps);
    }

    if (!split) {
      x = x + seg_b * dt + sigma * dW;
    } else {
      x = seg_x + seg_b * (t1 - seg_t) + sigma * (dW - start_W);
    }
    if (!x.allFinite()) fail("non-finite state at step " + std::to_string(i + 1), t1, x);
    if (jump_density != nullptr) {
      const double lam = rate(x);
      if (!(lam <= lambda_bar)) fail("thinning bound violated: lambda=" + std::to_string(lam) + " > lambda_bar", t1, x);
    }
    if (!observer.state(i + 1, t1, x)) return;
  }
}

}  // namespace detail

}  // namespace jumpom
