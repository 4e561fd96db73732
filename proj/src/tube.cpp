#include "jumpom/tube.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "jumpom/sde_sim.hpp"

namespace jumpom {

namespace {

constexpr std::uint64_t kTubeStream[2] = {0x7475626531ULL, 0x7475626532ULL};

void check_guard(const FiniteActivityModel& model, double T, std::size_t n_steps, double delta) {
  const double dt = T / static_cast<double>(n_steps);
  if (model.sigma() * std::sqrt(dt) > 0.25 * delta) {
    const auto need = static_cast<std::size_t>(std::ceil(16.0 * model.sigma() * model.sigma() * T / (delta * delta)));
    std::ostringstream os;
    os << "discretization guard sigma*sqrt(dt) <= delta/4 fails for delta=" << delta << "; use n_steps >= " << need;
    throw Error(ErrorKind::input, "tube", os.str());
  }
}

}  // namespace

std::vector<double> tube_deviations(const FiniteActivityModel& model, const SmoothPath& path, double cutoff,
                                    const TubeOptions& options) {
  if (path.dim() != model.dim()) throw Error(ErrorKind::input, "tube", "path and model dimensions differ");
  if (options.n_paths == 0 || options.n_steps == 0) throw Error(ErrorKind::input, "tube", "need n_paths, n_steps >= 1");
  const double T = path.horizon();
  const std::vector<double> t = uniform_time_grid(T, options.n_steps);
  std::vector<Vec> psi;
  psi.reserve(t.size());
  for (double ti : t) psi.push_back(path.value(ti));

  struct Watcher {
    const std::vector<Vec>& psi;
    double cutoff;
    double worst = 0.0;
    bool state(std::size_t i, double, const Vec& x) {
      worst = std::max(worst, (x - psi[i]).norm());
      if (worst > cutoff) {
        worst = std::numeric_limits<double>::infinity();
        return false;
      }
      return true;
    }
    void jump(double, const Vec&, const Vec&) {}
  };

  std::vector<double> out(options.n_paths);
  const Vec x0 = psi.front();
  parallel_for(options.n_paths, options.threads, [&](std::size_t p) {
    Engine noise = make_engine(options.seed, p, channel::noise);
    Engine jumps = make_engine(options.seed, p, channel::jumps);
    Watcher w{psi, cutoff};
    detail::step_paths([&](const Vec& x, double) { return model.drift(x); }, model.sigma(),
                       [&](const Vec& x) { return model.rate(x); }, &model.jump(), options.lambda_bar, x0, T,
                       options.n_steps, noise, jumps, w);
    out[p] = w.worst;
  });
  return out;
}

TubeEstimate tube_estimate_from(const std::vector<double>& deviations, double delta, double dt) {
  TubeEstimate e;
  e.delta = delta;
  e.dt = dt;
  e.n_paths = deviations.size();
  e.hits = static_cast<std::size_t>(std::count_if(deviations.begin(), deviations.end(), [&](double v) { return v <= delta; }));
  e.p_hat = e.n_paths ? static_cast<double>(e.hits) / static_cast<double>(e.n_paths) : 0.0;
  e.ci95 = wilson_interval(e.hits, e.n_paths);
  if (e.hits == 0) {
    std::ostringstream os;
    os << "no path stayed in the tube (delta=" << delta << "); one-sided bound p <= " << e.ci95.high
       << ", increase n_paths or delta";
    e.warning = os.str();
  }
  return e;
}

std::vector<TubeEstimate> estimate_tube_probabilities(const FiniteActivityModel& model, const SmoothPath& path,
                                                      const std::vector<double>& deltas, const TubeOptions& options) {
  if (deltas.empty()) throw Error(ErrorKind::input, "tube", "no tube radii given");
  for (double d : deltas)
    if (!(d > 0.0)) throw Error(ErrorKind::input, "tube", "tube radius must be positive");
  const double smallest = *std::min_element(deltas.begin(), deltas.end());
  const double largest = *std::max_element(deltas.begin(), deltas.end());
  check_guard(model, path.horizon(), options.n_steps, smallest);
  const std::vector<double> dev = tube_deviations(model, path, largest, options);
  const double dt = path.horizon() / static_cast<double>(options.n_steps);
  std::vector<TubeEstimate> out;
  for (double d : deltas) out.push_back(tube_estimate_from(dev, d, dt));
  return out;
}

TubeEstimate estimate_tube_probability(const FiniteActivityModel& model, const SmoothPath& path, double delta,
                                       const TubeOptions& options) {
  return estimate_tube_probabilities(model, path, {delta}, options).front();
}

bool RatioExperiment::gap_trend_non_increasing() const {
  std::vector<const RatioRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->delta > b->delta; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const RatioRow& wide = *sorted[i - 1];
    const RatioRow& narrow = *sorted[i];
    if (!std::isfinite(wide.gap) || !std::isfinite(narrow.gap)) return false;
    const double slack = 1.96 * std::hypot(wide.log_ratio_se, narrow.log_ratio_se);
    if (narrow.gap > wide.gap + slack) return false;
  }
  return true;
}

nlohmann::json RatioExperiment::to_json() const {
  nlohmann::json j;
  j["action_psi1"] = action1.to_json();
  j["action_psi2"] = action2.to_json();
  j["gap_trend_non_increasing"] = gap_trend_non_increasing();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["delta"] = r.delta;
    row["p1"] = r.tube1.p_hat;
    row["hits1"] = r.tube1.hits;
    row["p2"] = r.tube2.p_hat;
    row["hits2"] = r.tube2.hits;
    row["log_ratio"] = std::isfinite(r.log_ratio) ? nlohmann::json(r.log_ratio) : nlohmann::json(nullptr);
    row["log_ratio_ci"] = {r.log_ratio_ci.low, r.log_ratio_ci.high};
    row["action_difference"] = r.action_difference;
    row["gap"] = std::isfinite(r.gap) ? nlohmann::json(r.gap) : nlohmann::json(nullptr);
    row["action_in_ci"] = r.action_in_ci;
    if (!r.tube1.warning.empty()) row["warning1"] = r.tube1.warning;
    if (!r.tube2.warning.empty()) row["warning2"] = r.tube2.warning;
    arr.push_back(row);
  }
  j["rows"] = arr;
  return j;
}

std::string RatioExperiment::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "delta,p1,ci1_low,ci1_high,p2,ci2_low,ci2_high,log_ratio,delta_S,gap\n";
  for (const auto& r : rows) {
    os << r.delta << ',' << r.tube1.p_hat << ',' << r.tube1.ci95.low << ',' << r.tube1.ci95.high << ','
       << r.tube2.p_hat << ',' << r.tube2.ci95.low << ',' << r.tube2.ci95.high << ',' << r.log_ratio << ','
       << r.action_difference << ',' << r.gap << '\n';
  }
  return os.str();
}

RatioExperiment om_ratio_experiment(const FiniteActivityModel& model, const SmoothPath& psi1, const SmoothPath& psi2,
                                    const std::vector<double>& deltas, const TubeOptions& options,
                                    const OmQuadrature& quad) {
  if (std::fabs(psi1.horizon() - psi2.horizon()) > 0.0)
    throw Error(ErrorKind::input, "tube", "both paths need the same horizon");
  if ((psi1.start() - psi2.start()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::input, "tube", "both paths must start at the same point");

  RatioExperiment exp;
  exp.action1 = om_action(model, psi1, quad);
  exp.action2 = om_action(model, psi2, quad);
  const double dS = exp.action2.total - exp.action1.total;

  TubeOptions o1 = options, o2 = options;
  o1.seed = substream_seed(options.seed, 0, kTubeStream[0]);
  o2.seed = substream_seed(options.seed, 0, kTubeStream[1]);
  const auto e1 = estimate_tube_probabilities(model, psi1, deltas, o1);
  const auto e2 = estimate_tube_probabilities(model, psi2, deltas, o2);

  for (std::size_t k = 0; k < deltas.size(); ++k) {
    RatioRow r;
    r.delta = deltas[k];
    r.tube1 = e1[k];
    r.tube2 = e2[k];
    r.action_difference = dS;
    if (r.tube1.hits > 0 && r.tube2.hits > 0) {
      r.log_ratio = std::log(r.tube1.p_hat / r.tube2.p_hat);
      auto var = [](const TubeEstimate& e) { return (1.0 - e.p_hat) / (static_cast<double>(e.n_paths) * e.p_hat); };
      r.log_ratio_se = std::sqrt(var(r.tube1) + var(r.tube2));
      r.log_ratio_ci = {r.log_ratio - 1.96 * r.log_ratio_se, r.log_ratio + 1.96 * r.log_ratio_se};
      r.gap = std::fabs(r.log_ratio - dS);
      r.action_in_ci = dS >= r.log_ratio_ci.low && dS <= r.log_ratio_ci.high;
    } else {
      r.log_ratio = std::numeric_limits<double>::quiet_NaN();
      r.log_ratio_se = std::numeric_limits<double>::infinity();
      r.log_ratio_ci = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      r.gap = std::numeric_limits<double>::quiet_NaN();
      r.action_in_ci = false;
    }
    exp.rows.push_back(r);
  }
  return exp;
}

}  // namespace jumpom
