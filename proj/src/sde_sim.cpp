#include "jumpom/sde_sim.hpp"

#include <cmath>
#include <limits>

namespace jumpom {

namespace {

void check_horizon(double T, std::size_t n) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::input, "sde_sim", "horizon T must be positive");
  if (n < 1) throw Error(ErrorKind::input, "sde_sim", "need at least one time step");
}

struct PathRecorder {
  DiscretePath& path;
  bool state(std::size_t i, double, const Vec& x) {
    path.x.row(static_cast<Eigen::Index>(i)) = x.transpose();
    return true;
  }
  void jump(double t, const Vec&, const Vec& J) { path.jumps.push_back({t, J}); }
};

DiscretePath empty_path(const Vec& x0, double T, std::size_t n) {
  DiscretePath path;
  path.t = uniform_time_grid(T, n);
  path.x.resize(static_cast<Eigen::Index>(n + 1), x0.size());
  return path;
}

}  // namespace

std::vector<double> uniform_time_grid(double T, std::size_t n) {
  std::vector<double> t(n + 1);
  const double dt = T / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
  t[n] = T;
  return t;
}

DiscretePath simulate_diffusion(const DriftFunction& drift, double sigma, const Vec& x0, double T, std::size_t n,
                                std::uint64_t seed, std::uint64_t path_index) {
  check_horizon(T, n);
  if (!(sigma >= 0.0)) throw Error(ErrorKind::input, "sde_sim", "sigma must be non-negative");
  Engine noise = make_engine(seed, path_index, channel::noise);
  Engine jumps = make_engine(seed, path_index, channel::jumps);
  DiscretePath path = empty_path(x0, T, n);
  PathRecorder recorder{path};
  detail::step_paths(drift, sigma, [](const Vec&) { return 0.0; }, nullptr, 0.0, x0, T, n, noise, jumps, recorder);
  return path;
}

DiscretePath simulate_jump_diffusion(const FiniteActivityModel& model, const Vec& x0, double T, std::size_t n,
                                     double lambda_bar, std::uint64_t seed, std::uint64_t path_index) {
  check_horizon(T, n);
  if (x0.size() != model.dim()) throw Error(ErrorKind::input, "sde_sim", "initial state has the wrong dimension");
  if (!(lambda_bar >= 0.0)) throw Error(ErrorKind::input, "sde_sim", "lambda_bar must be non-negative");
  Engine noise = make_engine(seed, path_index, channel::noise);
  Engine jumps = make_engine(seed, path_index, channel::jumps);
  DiscretePath path = empty_path(x0, T, n);
  PathRecorder recorder{path};
  detail::step_paths([&](const Vec& x, double) { return model.drift(x); }, model.sigma(),
                     [&](const Vec& x) { return model.rate(x); }, &model.jump(), lambda_bar, x0, T, n, noise, jumps,
                     recorder);
  return path;
}

Vec sample_jump(const JumpSizeDensity& density, Engine& engine) {
  std::uniform_real_distribution<double> box(-density.radius(), density.radius());
  std::uniform_real_distribution<double> height(0.0, density.max_value());
  Vec z(density.dim());
  for (;;) {
    for (int k = 0; k < density.dim(); ++k) z(k) = box(engine);
    if (height(engine) < density(z)) return z;
  }
}

Vec sample_jump(const JumpSizeDensity& density, std::uint64_t seed) {
  Engine engine = make_engine(seed, 0, channel::jumps);
  return sample_jump(density, engine);
}

Vec InitialLaw::draw(Engine& engine) const {
  if (variance <= 0.0) return mean;
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x = mean;
  const double s = std::sqrt(variance);
  for (int k = 0; k < x.size(); ++k) x(k) += s * normal(engine);
  return x;
}

std::vector<std::size_t> snapshot_indices(const std::vector<double>& times, double T, std::size_t n) {
  std::vector<std::size_t> out;
  const double dt = T / static_cast<double>(n);
  for (double t : times) {
    const double r = t / dt;
    const double k = std::round(r);
    if (t < 0.0 || t > T * (1.0 + 1e-12) || std::fabs(r - k) > 1e-6)
      throw Error(ErrorKind::input, "sde_sim", "snapshot time " + std::to_string(t) + " is not on the time grid");
    out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

EnsembleResult simulate_jump_ensemble(const FiniteActivityModel& model, const InitialLaw& initial,
                                      const EnsembleOptions& options) {
  check_horizon(options.T, options.n_steps);
  if (initial.mean.size() != model.dim()) throw Error(ErrorKind::input, "sde_sim", "initial mean has the wrong dimension");
  const auto idx = snapshot_indices(options.snapshot_times, options.T, options.n_steps);

  EnsembleResult result;
  result.snapshot_times = options.snapshot_times;
  result.snapshots.assign(idx.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(options.n_paths), model.dim()));
  result.jump_counts.assign(options.n_paths, 0);

  struct SnapshotObserver {
    const std::vector<std::size_t>& idx;
    std::vector<Eigen::MatrixXd>& out;
    Eigen::Index row;
    std::size_t& jumps;
    bool state(std::size_t i, double, const Vec& x) {
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (idx[k] == i) out[k].row(row) = x.transpose();
      return true;
    }
    void jump(double, const Vec&, const Vec&) { ++jumps; }
  };
  parallel_for(options.n_paths, options.threads, [&](std::size_t p) {
    Engine init = make_engine(options.seed, p, channel::initial);
    Engine noise = make_engine(options.seed, p, channel::noise);
    Engine jumps = make_engine(options.seed, p, channel::jumps);
    const Vec x0 = initial.draw(init);
    SnapshotObserver obs{idx, result.snapshots, static_cast<Eigen::Index>(p), result.jump_counts[p]};
    detail::step_paths([&](const Vec& x, double) { return model.drift(x); }, model.sigma(),
                       [&](const Vec& x) { return model.rate(x); }, &model.jump(), options.lambda_bar, x0, options.T,
                       options.n_steps, noise, jumps, obs);
  });
  return result;
}

}  // namespace jumpom
