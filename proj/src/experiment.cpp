#include "jumpom/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "jumpom/infinite.hpp"
#include "jumpom/io.hpp"
#include "jumpom/levy_fpe.hpp"
#include "jumpom/map_solver.hpp"
#include "jumpom/om.hpp"
#include "jumpom/prob_flow.hpp"
#include "jumpom/sde_sim.hpp"
#include "jumpom/statistics.hpp"
#include "jumpom/tube.hpp"

#ifndef JUMPOM_VERSION
#define JUMPOM_VERSION "0.0.0"
#endif

namespace jumpom {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::input, "cli", msg); }

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad("missing field '" + key + "' in " + where);
  return j.at(key);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return need(j, key, where).get<T>();
  } catch (const json::exception& e) {
    bad("field '" + key + "' in " + where + " has the wrong type: " + e.what());
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

Vec vec_from(const json& j, int dim, const std::string& what) {
  std::vector<double> v;
  if (j.is_number()) {
    v.assign(static_cast<std::size_t>(dim), j.get<double>());
    if (dim != 1) bad(what + " must list one value per dimension");
  } else if (j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_number()) bad(what + " must contain numbers");
      v.push_back(e.get<double>());
    }
  } else {
    bad(what + " must be a number or an array");
  }
  if (static_cast<int>(v.size()) != dim) bad(what + " has " + std::to_string(v.size()) + " entries, expected " +
                                            std::to_string(dim));
  return make_vec(v);
}

std::vector<std::string> strings_from(const json& j, const std::string& what) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) bad(what + " must be a string or an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) bad(what + " must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> doubles_from(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) bad(what + " must be a number or an array");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) bad(what + " must contain numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

JumpSizeDensity jump_from_json(const json& j, int dim) {
  const std::string family = get<std::string>(j, "family", "model.jump");
  const double radius = get<double>(j, "radius", "model.jump");
  if (family == "bump") return JumpSizeDensity::bump(dim, radius);
  if (family == "truncated_gaussian") {
    std::optional<Vec> mean;
    if (j.contains("mean")) mean = vec_from(j.at("mean"), dim, "model.jump.mean");
    return JumpSizeDensity::truncated_gaussian(dim, get<double>(j, "scale", "model.jump"), radius, mean);
  }
  bad("unknown jump family '" + family + "' (expected bump or truncated_gaussian)");
}

SpatialGrid grid_from_json(const json& j, int dim) {
  SpatialGrid g;
  g.dim = dim;
  g.lo = vec_from(need(j, "lo", "numerics.grid"), dim, "numerics.grid.lo");
  g.hi = vec_from(need(j, "hi", "numerics.grid"), dim, "numerics.grid.hi");
  g.nodes = get<int>(j, "nodes", "numerics.grid");
  return g;
}

JumpQuadratureSpec jump_quad_from_json(const json& j) {
  JumpQuadratureSpec q;
  q.theta_nodes = get_or(j, "theta_nodes", q.theta_nodes, "numerics");
  q.z_nodes = get_or(j, "z_nodes", q.z_nodes, "numerics");
  q.z_panels = get_or(j, "z_panels", q.z_panels, "numerics");
  return q;
}

OmQuadrature om_quad_from_json(const json& numerics) {
  OmQuadrature q;
  const json j = numerics.value("om", json::object());
  q.t_panels = get_or(j, "t_panels", q.t_panels, "numerics.om");
  q.t_order = get_or(j, "t_order", q.t_order, "numerics.om");
  q.error_threshold = get_or(j, "error_threshold", q.error_threshold, "numerics.om");
  q.jump = jump_quad_from_json(j);
  return q;
}

void require_type(const ExperimentConfig& cfg, const std::string& kind) {
  const std::string got = get<std::string>(cfg.model(), "kind", "model");
  if (kind == "finite" && got != "finite") bad("this experiment needs a finite-activity model, got '" + got + "'");
}

ValidationReport validate_finite(const FiniteActivityModel& model, const json& model_json, const json& numerics) {
  const json v = numerics.value("validation", json::object());
  Box box;
  const int d = model.dim();
  box.lo = v.contains("lo") ? vec_from(v.at("lo"), d, "numerics.validation.lo") : Vec(Vec::Constant(d, -3.0));
  box.hi = v.contains("hi") ? vec_from(v.at("hi"), d, "numerics.validation.hi") : Vec(Vec::Constant(d, 3.0));
  box.resolution = get_or(v, "resolution", d == 1 ? 121 : 41, "numerics.validation");
  FiniteValidationOptions opt;
  opt.allow_zero_rate = get_or(model_json, "allow_zero_rate", false, "model");
  return validate_finite_model(model, box, opt);
}

ValidationReport validate_infinite(const InfiniteActivityModel& model, const json& numerics) {
  const json v = numerics.value("validation", json::object());
  InfiniteValidationGrid g;
  g.x_lo = get_or(v, "x_lo", g.x_lo, "numerics.validation");
  g.x_hi = get_or(v, "x_hi", g.x_hi, "numerics.validation");
  g.x_nodes = get_or(v, "x_nodes", g.x_nodes, "numerics.validation");
  g.z_inner = get_or(v, "z_inner", g.z_inner, "numerics.validation");
  g.z_outer = get_or(v, "z_outer", g.z_outer, "numerics.validation");
  g.z_nodes = get_or(v, "z_nodes", g.z_nodes, "numerics.validation");
  g.band_lo = get_or(v, "band_lo", g.band_lo, "numerics.validation");
  g.band_hi = get_or(v, "band_hi", g.band_hi, "numerics.validation");
  return validate_infinite_model(model, g, get_or(v, "eta", 1e-3, "numerics.validation"));
}

void ensure_valid(const ValidationReport& report) {
  if (report.passed()) return;
  std::ostringstream os;
  os << "model failed validation:";
  for (const auto& c : report.checks)
    if (!c.passed) os << ' ' << c.name << " (" << c.detail << ')';
  throw Error(ErrorKind::validation, "models", os.str());
}

/// Artifact sink: every write goes through here so the manifest can list it.
struct Artifacts {
  fs::path dir;
  std::vector<std::string> names;

  void text(const std::string& name, const std::string& content) {
    io::write_text(dir / name, content);
    names.push_back(name);
  }
  void json_file(const std::string& name, const json& j) {
    io::write_json(dir / name, j);
    names.push_back(name);
  }
  void grid(const std::string& name, const DensityField& f) {
    io::write_density_grid(dir / name, f);
    names.push_back(name);
  }
};

json moments_json(const Eigen::MatrixXd& snap) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < snap.cols(); ++k) {
    const auto m = sample_moments(marginal_component(snap, static_cast<int>(k)));
    arr.push_back({{"mean", m.mean}, {"variance", m.variance}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

void run_validate(const ExperimentConfig& cfg, Artifacts& art, std::ostream& out) {
  const std::string kind = get<std::string>(cfg.model(), "kind", "model");
  ValidationReport report;
  if (kind == "finite") {
    report = validate_finite(finite_model_from_json(cfg.model()), cfg.model(), cfg.numerics());
  } else if (kind == "infinite") {
    report = validate_infinite(infinite_model_from_json(cfg.model()), cfg.numerics());
  } else if (kind == "embedded") {
    report = validate_finite(finite_model_from_json(cfg.model()), cfg.model(), cfg.numerics());
  } else {
    bad("unknown model kind '" + kind + "'");
  }
  out << report.to_text();
  art.json_file("validation.json", report.to_json());
  ensure_valid(report);
}

void run_simulate(const ExperimentConfig& cfg, Artifacts& art) {
  require_type(cfg, "finite");
  const FiniteActivityModel model = finite_model_from_json(cfg.model());
  ensure_valid(validate_finite(model, cfg.model(), cfg.numerics()));
  const json& e = cfg.experiment();
  const Vec x0 = vec_from(need(e, "x0", "experiment"), model.dim(), "experiment.x0");
  const double T = get<double>(e, "T", "experiment");
  const auto n = get<std::size_t>(e, "n_steps", "experiment");
  const double lambda_bar = get_or(e, "lambda_bar", 0.0, "experiment");
  const auto n_paths = get_or<std::size_t>(e, "n_paths", 1, "experiment");
  const auto write_paths = std::min(n_paths, get_or<std::size_t>(e, "write_paths", 10, "experiment"));

  std::vector<DiscretePath> paths(write_paths);
  parallel_for(write_paths, cfg.threads, [&](std::size_t p) {
    paths[p] = simulate_jump_diffusion(model, x0, T, n, lambda_bar, cfg.seed, p);
  });
  json summary;
  json counts = json::array();
  for (std::size_t p = 0; p < write_paths; ++p) {
    art.text("paths/path_" + std::to_string(p) + ".csv", io::path_csv(paths[p]));
    counts.push_back(paths[p].jumps.size());
  }
  summary["written_paths"] = write_paths;
  summary["jump_counts"] = counts;

  if (e.contains("snapshot_times")) {
    EnsembleOptions opt;
    opt.n_paths = n_paths;
    opt.n_steps = n;
    opt.T = T;
    opt.lambda_bar = lambda_bar;
    opt.snapshot_times = doubles_from(e.at("snapshot_times"), "experiment.snapshot_times");
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    const InitialLaw init{x0, get_or(e, "initial_variance", 0.0, "experiment")};
    const EnsembleResult ens = simulate_jump_ensemble(model, init, opt);
    art.text("marginals.csv", io::marginals_csv(ens.snapshot_times, ens.snapshots));
    json snaps = json::array();
    for (std::size_t s = 0; s < ens.snapshots.size(); ++s)
      snaps.push_back({{"t", ens.snapshot_times[s]}, {"moments", moments_json(ens.snapshots[s])}});
    std::size_t total = 0;
    for (auto c : ens.jump_counts) total += c;
    summary["ensemble"] = {{"n_paths", n_paths},
                           {"mean_jump_count", static_cast<double>(total) / static_cast<double>(n_paths)},
                           {"snapshots", snaps}};
  }
  art.json_file("simulate.json", summary);
}

struct FpeSetup {
  SpatialGrid grid;
  FpeOptions options;
  Vec x0;
  double epsilon = 0.0;
};

FpeSetup fpe_setup(const ExperimentConfig& cfg, const FiniteActivityModel& model, const json& block) {
  const json numerics = cfg.numerics();
  FpeSetup s;
  s.grid = grid_from_json(need(numerics, "grid", "numerics"), model.dim());
  s.x0 = vec_from(need(cfg.experiment(), "x0", "experiment"), model.dim(), "experiment.x0");
  s.epsilon = get<double>(cfg.experiment(), "epsilon", "experiment");
  s.options.T = get<double>(cfg.experiment(), "T", "experiment");
  s.options.steps = get<std::size_t>(block, "steps", "fpe block");
  s.options.store_every = get_or<std::size_t>(block, "store_every", 1, "fpe block");
  s.options.tol_mass = get_or(numerics, "tol_mass", s.options.tol_mass, "numerics");
  const std::string scheme = get_or<std::string>(numerics, "jump_scheme", "grid_convolution", "numerics");
  if (scheme == "grid_convolution") {
    s.options.jump_scheme = JumpScheme::grid_convolution;
  } else if (scheme == "gauss_legendre") {
    s.options.jump_scheme = JumpScheme::gauss_legendre;
  } else {
    bad("unknown jump_scheme '" + scheme + "'");
  }
  s.options.gl_nodes = get_or(numerics, "gl_nodes", s.options.gl_nodes, "numerics");
  s.options.threads = cfg.threads;
  return s;
}

void run_solve_fpe(const ExperimentConfig& cfg, Artifacts& art) {
  require_type(cfg, "finite");
  const FiniteActivityModel model = finite_model_from_json(cfg.model());
  ensure_valid(validate_finite(model, cfg.model(), cfg.numerics()));
  const json& e = cfg.experiment();
  const FpeSetup s = fpe_setup(cfg, model, e);
  const DensityField field = solve_levy_fpe(model, s.x0, s.epsilon, s.grid, s.options);
  art.grid("density.bin", field);

  std::vector<std::size_t> csv_slices;
  if (e.contains("csv_times")) {
    for (double t : doubles_from(e.at("csv_times"), "experiment.csv_times")) csv_slices.push_back(field.slice_at(t));
  } else {
    csv_slices.push_back(field.slices() - 1);
  }
  art.text("density.csv", io::density_csv(field, csv_slices));

  json report;
  json slices = json::array();
  for (std::size_t k = 0; k < field.slices(); ++k)
    slices.push_back({{"t", field.times()[k]}, {"mass", field.mass(k)}, {"clipped", field.clipped_mass(k)}});
  report["slices"] = slices;
  report["expected_jump_count"] = expected_jump_count(field, model);
  if (e.contains("short_time")) {
    const json& st = e.at("short_time");
    const std::string form = get_or<std::string>(st, "form", "at_source", "experiment.short_time");
    if (form != "at_source" && form != "at_target") bad("short_time.form must be at_source or at_target");
    const auto check = short_time_limit_check(
        field, model, doubles_from(need(st, "times", "experiment.short_time"), "short_time.times"),
        form == "at_source" ? LimitForm::at_source : LimitForm::at_target,
        get_or(st, "band_lo", 0.2, "experiment.short_time"), get_or(st, "band_hi", 0.9, "experiment.short_time"));
    json rows = json::array();
    for (const auto& r : check.rows)
      rows.push_back({{"t", r.t},
                      {"max_relative_error", r.max_relative_error},
                      {"points", r.points},
                      {"witness", std::vector<double>(r.witness.data(), r.witness.data() + r.witness.size())}});
    report["short_time"] = {{"form", form}, {"rows", rows}, {"monotone", check.monotone}, {"warning", check.warning}};
  }
  art.json_file("fpe.json", report);
}

constexpr std::uint64_t kJumpRunTag = 0x6a756d70;    // independent streams inside one experiment
constexpr std::uint64_t kFlowRunTag = 0x666c6f77;
constexpr std::uint64_t kFloorRunTag = 0x666c6f72;
constexpr std::uint64_t kBootTag = 0x626f6f74;

void run_flow_compare(const ExperimentConfig& cfg, Artifacts& art) {
  require_type(cfg, "finite");
  const FiniteActivityModel model = finite_model_from_json(cfg.model());
  ensure_valid(validate_finite(model, cfg.model(), cfg.numerics()));
  const json& e = cfg.experiment();
  const FpeSetup s = fpe_setup(cfg, model, need(e, "fpe", "experiment"));
  auto field = std::make_shared<const DensityField>(solve_levy_fpe(model, s.x0, s.epsilon, s.grid, s.options));

  const json nq = cfg.numerics().value("flow", json::object());
  FlowQuadrature fq;
  fq.theta_nodes = get_or(nq, "theta_nodes", fq.theta_nodes, "numerics.flow");
  fq.z_nodes = get_or(nq, "z_nodes", fq.z_nodes, "numerics.flow");
  fq.z_panels = get_or(nq, "z_panels", fq.z_panels, "numerics.flow");
  const FlowDrift drift(model, field, get_or(nq, "floor_relative", 1e-12, "numerics.flow"), fq);
  const FlowDriftTable table(drift, cfg.threads);

  const std::vector<double> times = doubles_from(need(e, "snapshot_times", "experiment"), "snapshot_times");
  const auto n_paths = get<std::size_t>(e, "n_paths", "experiment");
  const auto n_steps = get<std::size_t>(e, "n_steps", "experiment");
  const InitialLaw init{s.x0, s.epsilon};

  EnsembleOptions jo;
  jo.n_paths = n_paths;
  jo.n_steps = n_steps;
  jo.T = s.options.T;
  jo.lambda_bar = get_or(e, "lambda_bar", 0.0, "experiment");
  jo.snapshot_times = times;
  jo.threads = cfg.threads;
  jo.seed = substream_seed(cfg.seed, 0, kJumpRunTag);
  const EnsembleResult jump = simulate_jump_ensemble(model, init, jo);

  FlowSimulationOptions fo;
  fo.n_paths = n_paths;
  fo.n_steps = get_or<std::size_t>(e, "flow_steps", n_steps, "experiment");
  fo.T = s.options.T;
  fo.snapshot_times = times;
  fo.threads = cfg.threads;
  fo.seed = substream_seed(cfg.seed, 0, kFlowRunTag);
  const FlowSample flow = simulate_flow_sde(table, init, fo);

  std::optional<EnsembleResult> floor_run;
  if (get_or(e, "noise_floor", false, "experiment")) {
    EnsembleOptions o2 = jo;
    o2.seed = substream_seed(cfg.seed, 0, kFloorRunTag);
    floor_run = simulate_jump_ensemble(model, init, o2);
  }

  const std::string metric_name = get_or<std::string>(e, "metric", "w1", "experiment");
  if (metric_name != "w1" && metric_name != "ks") bad("experiment.metric must be w1 or ks");
  const Metric metric = metric_name == "w1" ? Metric::w1 : Metric::ks;
  const auto resamples = get_or<std::size_t>(e, "resamples", 200, "experiment");

  json rows = json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (int c = 0; c < model.dim(); ++c) {
      const auto a = marginal_component(jump.snapshots[k], c);
      const auto b = marginal_component(flow.snapshots[k], c);
      const auto cmp = compare_marginals(a, b, metric, resamples, substream_seed(cfg.seed, k * 2 + c, kBootTag),
                                         cfg.threads);
      json row = {{"t", times[k]},          {"component", c + 1},     {"statistic", cmp.statistic},
                  {"ci95", {cmp.ci_low, cmp.ci_high}}, {"n", cmp.n_a}};
      if (!cmp.warning.empty()) row["warning"] = cmp.warning;
      if (floor_run) {
        const auto f = marginal_component(floor_run->snapshots[k], c);
        row["noise_floor"] = metric == Metric::w1 ? wasserstein1(a, f) : ks_statistic(a, f);
      }
      rows.push_back(row);
    }
  }
  art.text("marginals_jump.csv", io::marginals_csv(jump.snapshot_times, jump.snapshots));
  art.text("marginals_flow.csv", io::marginals_csv(flow.snapshot_times, flow.snapshots));
  art.json_file("comparison.json", {{"metric", metric_name},
                                    {"rows", rows},
                                    {"flow_resampled", flow.resampled},
                                    {"sup_correction", table.sup_correction()},
                                    {"correction_bound", table.correction_bound()},
                                    {"floor_fraction", table.floor_fraction()}});
}

void run_om_eval(const ExperimentConfig& cfg, Artifacts& art) {
  require_type(cfg, "finite");
  const FiniteActivityModel model = finite_model_from_json(cfg.model());
  ensure_valid(validate_finite(model, cfg.model(), cfg.numerics()));
  const json& e = cfg.experiment();
  const double T = get<double>(e, "T", "experiment");
  const SmoothPath path = SmoothPath::parse(strings_from(need(e, "path", "experiment"), "experiment.path"), T);
  const OmQuadrature q = om_quad_from_json(cfg.numerics());
  const double t0 = get_or(e, "t0", 0.0, "experiment");
  const double t1 = get_or(e, "t1", T, "experiment");
  json j = om_action(model, path, q, t0, t1).to_json();
  j["path"] = path.to_strings();
  j["interval"] = {t0, t1};
  if (get_or(e, "classical", false, "experiment"))
    j["classical"] = classical_om_action(model.drift_expressions(), model.sigma(), path, q, t0, t1).to_json();
  art.json_file("action.json", j);
}

void run_tube_ratio(const ExperimentConfig& cfg, Artifacts& art) {
  require_type(cfg, "finite");
  const FiniteActivityModel model = finite_model_from_json(cfg.model());
  ensure_valid(validate_finite(model, cfg.model(), cfg.numerics()));
  const json& e = cfg.experiment();
  const double T = get<double>(e, "T", "experiment");
  const SmoothPath psi1 = SmoothPath::parse(strings_from(need(e, "psi1", "experiment"), "experiment.psi1"), T);
  const SmoothPath psi2 = SmoothPath::parse(strings_from(need(e, "psi2", "experiment"), "experiment.psi2"), T);
  TubeOptions opt;
  opt.n_paths = get<std::size_t>(e, "n_paths", "experiment");
  opt.n_steps = get<std::size_t>(e, "n_steps", "experiment");
  opt.lambda_bar = get_or(e, "lambda_bar", 0.0, "experiment");
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const auto exp = om_ratio_experiment(model, psi1, psi2,
                                       doubles_from(need(e, "deltas", "experiment"), "experiment.deltas"), opt,
                                       om_quad_from_json(cfg.numerics()));
  art.text("ratio.csv", exp.to_csv());
  art.json_file("ratio.json", exp.to_json());
}

void run_map(const ExperimentConfig& cfg, Artifacts& art) {
  require_type(cfg, "finite");
  const FiniteActivityModel model = finite_model_from_json(cfg.model());
  ensure_valid(validate_finite(model, cfg.model(), cfg.numerics()));
  const json& e = cfg.experiment();
  MapProblem p;
  p.x0 = vec_from(need(e, "x0", "experiment"), model.dim(), "experiment.x0");
  p.xT = vec_from(need(e, "xT", "experiment"), model.dim(), "experiment.xT");
  p.T = get<double>(e, "T", "experiment");
  p.n_knots = get<std::size_t>(e, "n_knots", "experiment");
  p.action_shift = get_or(e, "action_shift", 0.0, "experiment");
  p.threads = cfg.threads;
  p.jump_quadrature = jump_quad_from_json(cfg.numerics().value("om", json::object()));
  const json o = e.value("optimizer", json::object());
  p.optimizer.max_iters = get_or(o, "max_iters", p.optimizer.max_iters, "experiment.optimizer");
  p.optimizer.grad_tol = get_or(o, "grad_tol", p.optimizer.grad_tol, "experiment.optimizer");
  p.optimizer.initial_step = get_or(o, "initial_step", p.optimizer.initial_step, "experiment.optimizer");
  p.optimizer.armijo_c = get_or(o, "armijo_c", p.optimizer.armijo_c, "experiment.optimizer");
  const std::string rule = get_or<std::string>(o, "step_rule", "sobolev", "experiment.optimizer");
  if (rule == "sobolev") {
    p.optimizer.step_rule = StepRule::sobolev;
  } else if (rule == "steepest") {
    p.optimizer.step_rule = StepRule::steepest;
  } else {
    bad("optimizer.step_rule must be sobolev or steepest");
  }
  const MapResult r = minimize_action(model, p);
  art.text("map_path.csv", io::path_csv(r.path));
  json rep = r.report();
  rep["action_history"] = r.action_history;
  art.json_file("map_report.json", rep);
  if (!r.converged) throw Error(ErrorKind::numerical, "map_solver", r.message);
}

void run_dom_eval(const ExperimentConfig& cfg, Artifacts& art) {
  const std::string kind = get<std::string>(cfg.model(), "kind", "model");
  if (kind != "infinite" && kind != "embedded") bad("dom-eval needs an infinite or embedded model");
  const InfiniteActivityModel model = infinite_model_from_json(cfg.model());
  if (kind == "infinite") {
    ensure_valid(validate_infinite(model, cfg.numerics()));
  } else {
    ensure_valid(validate_finite(finite_model_from_json(cfg.model()), cfg.model(), cfg.numerics()));
  }
  const json& e = cfg.experiment();
  DiscretePath path;
  if (e.contains("path_csv")) {
    fs::path file = get<std::string>(e, "path_csv", "experiment");
    if (file.is_relative()) file = cfg.base_dir / file;
    path = io::read_path_csv(file);
  } else {
    const double T = get<double>(e, "T", "experiment");
    const auto n = get<std::size_t>(e, "n", "experiment");
    const SmoothPath sp = SmoothPath::parse(strings_from(need(e, "path", "experiment"), "experiment.path"), T);
    if (sp.dim() != 1) bad("dom-eval paths are scalar");
    path.t = uniform_time_grid(T, n);
    path.x.resize(static_cast<Eigen::Index>(n + 1), 1);
    for (std::size_t i = 0; i <= n; ++i) path.x(static_cast<Eigen::Index>(i), 0) = sp.value(path.t[i])(0);
  }
  const json nq = cfg.numerics().value("dom", json::object());
  DomQuadrature q;
  q.z_cutoff = get_or(nq, "z_cutoff", q.z_cutoff, "numerics.dom");
  q.z_max = get_or(nq, "z_max", q.z_max, "numerics.dom");
  q.z_panels = get_or(nq, "z_panels", q.z_panels, "numerics.dom");
  q.z_order = get_or(nq, "z_order", q.z_order, "numerics.dom");
  q.theta_nodes = get_or(nq, "theta_nodes", q.theta_nodes, "numerics.dom");
  q.fd_step = get_or(nq, "fd_step", q.fd_step, "numerics.dom");
  q.threads = cfg.threads;
  const DomEvaluation ev = discrete_om_action(model, path, q);
  json j = ev.to_json();
  json steps = json::array();
  for (const auto& s : ev.steps)
    steps.push_back({{"residual", s.residual}, {"kinetic", s.kinetic}, {"divergence", s.divergence},
                     {"nonlocal", s.nonlocal}});
  j["steps"] = steps;
  art.json_file("dom.json", j);
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::input:
    case ErrorKind::validation:
      return exit_code::validation;
    case ErrorKind::numerical:
      return exit_code::numerical;
  }
  return exit_code::internal;
}

}  // namespace

const std::vector<std::string>& experiment_types() {
  static const std::vector<std::string> types = {"validate", "simulate",   "solve-fpe", "flow-compare",
                                                 "om-eval",  "tube-ratio", "map",       "dom-eval"};
  return types;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::parse(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) bad("config must be a JSON object");
  ExperimentConfig c;
  c.document = doc;
  c.base_dir = base_dir;
  need(doc, "model", "config");
  const json& e = need(doc, "experiment", "config");
  c.type = get<std::string>(e, "type", "experiment");
  const auto& types = experiment_types();
  if (std::find(types.begin(), types.end(), c.type) == types.end()) bad("unknown experiment type '" + c.type + "'");
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned()) bad("seed must be an unsigned 64-bit integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.threads = get_or(doc, "threads", 0, "config");
  if (c.threads < 0) bad("threads must be >= 0");
  c.output = get_or<std::string>(doc, "output", "out", "config");
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) {
  json doc;
  try {
    doc = json::parse(io::read_text(file), nullptr, true, true);
  } catch (const json::parse_error& e) {
    bad("cannot parse " + file.string() + ": " + e.what());
  }
  fs::path base = fs::absolute(file).parent_path();
  if (doc.is_object() && doc.contains("jumpom_manifest")) {
    base = get<std::string>(doc, "base_dir", "manifest");
    return parse(need(doc, "config", "manifest"), base);
  }
  return parse(doc, base);
}

const json& ExperimentConfig::model() const { return document.at("model"); }
const json& ExperimentConfig::experiment() const { return document.at("experiment"); }
json ExperimentConfig::numerics() const { return document.value("numerics", json::object()); }

FiniteActivityModel finite_model_from_json(const json& j) {
  const int dim = get_or(j, "dimension", 1, "model");
  if (dim != 1 && dim != 2) bad("model.dimension must be 1 or 2");
  const auto drift = strings_from(need(j, "drift", "model"), "model.drift");
  const std::string rate = j.contains("rate") && j.at("rate").is_number() ? io::format_double(j.at("rate").get<double>())
                                                                         : get<std::string>(j, "rate", "model");
  return FiniteActivityModel::from_strings(dim, drift, get<double>(j, "sigma", "model"), rate,
                                           jump_from_json(need(j, "jump", "model"), dim));
}

InfiniteActivityModel infinite_model_from_json(const json& j) {
  const std::string kind = get<std::string>(j, "kind", "model");
  if (kind == "embedded") {
    const FiniteActivityModel f = finite_model_from_json(j);
    if (f.dim() != 1) bad("embedded models must be scalar");
    return InfiniteActivityModel::embed(f);
  }
  if (kind != "infinite") bad("expected model kind infinite or embedded, got '" + kind + "'");
  return InfiniteActivityModel::from_expressions(get<std::string>(j, "drift", "model"), get<double>(j, "sigma", "model"),
                                                 get<std::string>(j, "jump_map", "model"),
                                                 get<std::string>(j, "intensity", "model"),
                                                 get_or<std::string>(j, "dominating", "", "model"),
                                                 get<double>(j, "alpha", "model"));
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

RunOutcome run_experiment(const RunRequest& request, std::ostream& out, std::ostream& err) {
  RunOutcome outcome;
  const auto started = std::chrono::steady_clock::now();
  try {
    ExperimentConfig cfg = ExperimentConfig::load(request.config);
    if (request.subcommand != "run" && request.subcommand != cfg.type)
      bad("subcommand '" + request.subcommand + "' does not match experiment type '" + cfg.type + "' in " +
          request.config.string());
    if (request.seed) cfg.seed = *request.seed;
    if (request.threads) {
      if (*request.threads < 0) bad("--threads must be >= 0");
      cfg.threads = *request.threads;
    }
    cfg.document["seed"] = cfg.seed;
    cfg.document["threads"] = cfg.threads;

    Artifacts art;
    if (request.out) {
      art.dir = *request.out;
    } else {
      art.dir = cfg.output.is_absolute() ? cfg.output : cfg.base_dir / cfg.output;
    }
    cfg.document["output"] = art.dir.string();
    fs::create_directories(art.dir);

    if (cfg.type == "validate") {
      run_validate(cfg, art, out);
    } else if (cfg.type == "simulate") {
      run_simulate(cfg, art);
    } else if (cfg.type == "solve-fpe") {
      run_solve_fpe(cfg, art);
    } else if (cfg.type == "flow-compare") {
      run_flow_compare(cfg, art);
    } else if (cfg.type == "om-eval") {
      run_om_eval(cfg, art);
    } else if (cfg.type == "tube-ratio") {
      run_tube_ratio(cfg, art);
    } else if (cfg.type == "map") {
      run_map(cfg, art);
    } else {
      run_dom_eval(cfg, art);
    }

    // The hash and the embedded config exclude the thread count, which does
    // not change results.
    json hashed = cfg.document;
    hashed.erase("threads");
    hashed.erase("output");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest = {{"jumpom_manifest", 1},
                     {"version", JUMPOM_VERSION},
                     {"subcommand", cfg.type},
                     {"seed", cfg.seed},
                     {"threads", resolve_threads(cfg.threads)},
                     {"config_hash", io::hex64(io::fnv1a(hashed.dump()))},
                     {"wall_time_seconds", wall},
                     {"base_dir", cfg.base_dir.string()},
                     {"outputs", art.names},
                     {"config", cfg.document}};
    io::write_json(art.dir / "manifest.json", manifest);
    outcome.outputs = art.names;
    outcome.outputs.push_back("manifest.json");
    outcome.message = cfg.type + " finished; wrote " + std::to_string(outcome.outputs.size()) + " files to " +
                      art.dir.string();
    out << outcome.message << '\n';
  } catch (const Error& e) {
    outcome.exit_code = exit_for(e.kind());
    outcome.message = e.what();
  } catch (const json::exception& e) {
    outcome.exit_code = exit_code::validation;
    outcome.message = std::string("cli: ") + e.what();
  } catch (const fs::filesystem_error& e) {
    outcome.exit_code = exit_code::validation;
    outcome.message = std::string("cli: ") + e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = exit_code::internal;
    outcome.message = std::string("internal error: ") + e.what();
  }
  if (outcome.exit_code != exit_code::success) err << "error: " << outcome.message << '\n';
  return outcome;
}

}  // namespace jumpom
