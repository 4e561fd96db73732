#include "jumpom/prob_flow.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "jumpom/quadrature.hpp"

namespace jumpom {

namespace {

/// Flattened (θ, z) product rule: shift θz and weight vector w_z ν_J(z) w_θ z.
struct ShiftRule {
  std::vector<Vec> shift;
  std::vector<Vec> weight;
};

ShiftRule make_shift_rule(const JumpSizeDensity& jump, const FlowQuadrature& quad) {
  const SupportRule z = support_rule(jump, quad.z_nodes, quad.z_panels);
  const QuadratureRule theta = gauss_legendre(quad.theta_nodes, 0.0, 1.0);
  ShiftRule rule;
  for (std::size_t q = 0; q < z.size(); ++q) {
    for (std::size_t k = 0; k < theta.size(); ++k) {
      rule.shift.push_back(theta.nodes[k] * z.nodes[q]);
      rule.weight.push_back((z.weights[q] * z.density[q] * theta.weights[k]) * z.nodes[q]);
    }
  }
  return rule;
}

}  // namespace

Vec flow_correction(const FiniteActivityModel& model, const std::function<double(const Vec&)>& density, const Vec& x,
                    double floor, const FlowQuadrature& quad) {
  Vec out = Vec::Zero(model.dim());
  if (model.rate_is_constant() && model.rate(x) == 0.0) return out;
  const ShiftRule rule = make_shift_rule(model.jump(), quad);
  const double denom = std::max(density(x), floor);
  for (std::size_t i = 0; i < rule.shift.size(); ++i) {
    const Vec y = x - rule.shift[i];
    out += rule.weight[i] * (model.rate(y) * density(y));
  }
  return out / denom;
}

// ---------------------------------------------------------------------------
// FlowDrift
// ---------------------------------------------------------------------------

FlowDrift::FlowDrift(FiniteActivityModel model, std::shared_ptr<const DensityField> density, double floor_relative,
                     FlowQuadrature quad)
    : model_(std::move(model)), density_(std::move(density)), floor_relative_(floor_relative), quad_(quad) {
  if (!density_) throw Error(ErrorKind::input, "prob_flow", "flow drift needs a density field");
  if (density_->grid().dim != model_.dim()) throw Error(ErrorKind::input, "prob_flow", "density dimension mismatch");
  if (!(floor_relative_ > 0.0)) throw Error(ErrorKind::input, "prob_flow", "density floor must be positive");
  rule_ = support_rule(model_.jump(), quad_.z_nodes, quad_.z_panels);
  const QuadratureRule theta = gauss_legendre(quad_.theta_nodes, 0.0, 1.0);
  theta_nodes_ = theta.nodes;
  theta_weights_ = theta.weights;
}

void FlowDrift::check_point(const Vec& x) const {
  if (!density_->grid().contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") lies outside the density grid box";
    throw Error(ErrorKind::input, "prob_flow", os.str());
  }
}

double FlowDrift::floor(double t) const {
  std::size_t lo = 0, hi = 0;
  double w = 0.0;
  density_->bracket(t, lo, hi, w);
  const double peak = (1.0 - w) * density_->peak(lo) + w * density_->peak(hi);
  return floor_relative_ * peak;
}

bool FlowDrift::floor_active(const Vec& x, double t) const { return density_->value(x, t) < floor(t); }

Vec FlowDrift::correction(const Vec& x, double t) const {
  check_point(x);
  Vec out = Vec::Zero(model_.dim());
  if (model_.rate_is_constant() && model_.rate(x) == 0.0) return out;
  const double denom = std::max(density_->value(x, t), floor(t));
  for (std::size_t q = 0; q < rule_.size(); ++q) {
    const Vec& z = rule_.nodes[q];
    double inner = 0.0;
    for (std::size_t k = 0; k < theta_nodes_.size(); ++k) {
      const Vec y = x - theta_nodes_[k] * z;
      inner += theta_weights_[k] * model_.rate(y) * density_->value(y, t);
    }
    out += (rule_.weights[q] * rule_.density[q] * inner) * z;
  }
  return out / denom;
}

Vec FlowDrift::operator()(const Vec& x, double t) const { return model_.drift(x) + correction(x, t); }

// ---------------------------------------------------------------------------
// FlowDriftTable
// ---------------------------------------------------------------------------

FlowDriftTable::FlowDriftTable(const FlowDrift& drift, int threads)
    : model_(drift.model()), density_(drift.density_ptr()) {
  const DensityField& field = *density_;
  const SpatialGrid& grid = field.grid();
  const int d = grid.dim;
  const std::size_t n = grid.size();
  for (int k = 0; k < d; ++k) components_.emplace_back(grid, field.x0(), field.epsilon());

  Eigen::VectorXd lambda(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) lambda(static_cast<Eigen::Index>(i)) = model_.rate(grid.node(i));
  const bool jumps_on = lambda.cwiseAbs().maxCoeff() > 0.0;
  const ShiftRule rule = make_shift_rule(model_.jump(), drift.quadrature());

  std::size_t floored = 0;
  for (std::size_t s = 0; s < field.slices(); ++s) {
    const Eigen::VectorXd& p = field.slice(s);
    const double floor = drift.floor_relative() * field.peak(s);
    DensityField lp(grid, field.x0(), field.epsilon());
    lp.push_slice(0.0, lambda.cwiseProduct(p), 0.0);

    std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(d), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
    std::vector<char> capped(n, 0);
    if (jumps_on) {
      parallel_for(n, threads, [&](std::size_t i) {
        const Vec x = grid.node(i);
        const double px = p(static_cast<Eigen::Index>(i));
        const double denom = std::max(px, floor);
        capped[i] = px < floor;
        Vec acc = Vec::Zero(d);
        for (std::size_t r = 0; r < rule.shift.size(); ++r) acc += rule.weight[r] * lp.value(Vec(x - rule.shift[r]), std::size_t{0});
        acc /= denom;
        for (int k = 0; k < d; ++k) values[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(i)) = acc(k);
      });
    }
    for (std::size_t i = 0; i < n; ++i) {
      floored += static_cast<std::size_t>(capped[i]);
      double norm2 = 0.0;
      for (int k = 0; k < d; ++k) norm2 += values[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(i)) *
                                           values[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(i));
      sup_ = std::max(sup_, std::sqrt(norm2));
    }
    for (int k = 0; k < d; ++k)
      components_[static_cast<std::size_t>(k)].push_slice(field.times()[s], std::move(values[static_cast<std::size_t>(k)]), 0.0);
  }
  floor_fraction_ = static_cast<double>(floored) / static_cast<double>(n * field.slices());
  bound_ = lambda.cwiseAbs().maxCoeff() * model_.jump().radius() / drift.floor_relative();
  if (sup_ > bound_ * (1.0 + 1e-9) && jumps_on) {
    std::ostringstream os;
    os << "tabulated correction " << sup_ << " exceeds its a-priori bound " << bound_;
    throw Error(ErrorKind::numerical, "prob_flow", os.str());
  }
}

Vec FlowDriftTable::correction(const Vec& x, double t) const {
  if (!grid().contains(x)) throw Error(ErrorKind::input, "prob_flow", "point lies outside the density grid box");
  Vec out(model_.dim());
  for (int k = 0; k < model_.dim(); ++k) out(k) = components_[static_cast<std::size_t>(k)].value(x, t);
  return out;
}

Vec FlowDriftTable::operator()(const Vec& x, double t) const { return model_.drift(x) + correction(x, t); }

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

FlowSample simulate_flow_sde(const TimeDrift& drift, double sigma, const SpatialGrid& box, const InitialLaw& initial,
                             const FlowSimulationOptions& options) {
  if (options.n_paths == 0 || options.n_steps == 0 || !(options.T > 0.0))
    throw Error(ErrorKind::input, "prob_flow", "need n_paths, n_steps >= 1 and T > 0");
  const auto idx = snapshot_indices(options.snapshot_times, options.T, options.n_steps);
  const int d = static_cast<int>(initial.mean.size());
  FlowSample out;
  out.snapshot_times = options.snapshot_times;
  out.snapshots.assign(idx.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(options.n_paths), d));

  const auto limit = static_cast<std::size_t>(options.max_resample_fraction * static_cast<double>(options.n_paths));
  std::atomic<std::size_t> resampled{0};
  const double dt = options.T / static_cast<double>(options.n_steps);
  const double sqrt_dt = std::sqrt(dt);

  parallel_for(options.n_paths, options.threads, [&](std::size_t p) {
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > 0 && resampled.fetch_add(1) + 1 > limit) {
        std::ostringstream os;
        os << "more than " << 100.0 * options.max_resample_fraction
           << "% of flow paths left the grid box; enlarge the box or reduce dt";
        throw Error(ErrorKind::numerical, "prob_flow", os.str());
      }
      const std::uint64_t stream = p + attempt * options.n_paths;
      Engine init = make_engine(options.seed, stream, channel::initial);
      Engine noise = make_engine(options.seed, stream, channel::noise);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vec x = initial.draw(init);
      bool left = !box.contains(x);
      std::size_t next = 0;
      while (next < idx.size() && idx[next] == 0) out.snapshots[next++].row(static_cast<Eigen::Index>(p)) = x.transpose();
      for (std::size_t i = 0; i < options.n_steps && !left; ++i) {
        const double t = static_cast<double>(i) * dt;
        const Vec b = drift(x, t);
        for (int k = 0; k < d; ++k) x(k) += b(k) * dt + sigma * sqrt_dt * normal(noise);
        if (!x.allFinite() || !box.contains(x)) {
          left = true;
          break;
        }
        for (std::size_t s = 0; s < idx.size(); ++s)
          if (idx[s] == i + 1) out.snapshots[s].row(static_cast<Eigen::Index>(p)) = x.transpose();
      }
      if (!left) return;
    }
  });
  out.resampled = resampled.load();
  return out;
}

FlowSample simulate_flow_sde(const FlowDriftTable& drift, const InitialLaw& initial, const FlowSimulationOptions& options) {
  return simulate_flow_sde([&](const Vec& x, double t) { return drift(x, t); }, drift.model().sigma(), drift.grid(),
                           initial, options);
}

Vec score_flow_drift(const DensityField& field, const FiniteActivityModel& model, const Vec& x, std::size_t slice) {
  const double s2 = model.sigma() * model.sigma();
  return model.drift(x) - 0.5 * s2 * field.score(x, slice);
}

std::vector<double> marginal_component(const Eigen::MatrixXd& snapshot, int component) {
  std::vector<double> out(static_cast<std::size_t>(snapshot.rows()));
  for (Eigen::Index i = 0; i < snapshot.rows(); ++i) out[static_cast<std::size_t>(i)] = snapshot(i, component);
  return out;
}

}  // namespace jumpom
