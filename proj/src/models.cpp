#include "jumpom/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "jumpom/quadrature.hpp"

namespace jumpom {

namespace {

double bump_profile(double r2) {  // r2 = |z/a|^2
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

constexpr double kNormalizationTolerance = 1e-10;

}  // namespace

// ---------------------------------------------------------------------------
// JumpSizeDensity
// ---------------------------------------------------------------------------

JumpSizeDensity JumpSizeDensity::bump(int dim, double radius) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::input, "models", "jump density dimension must be 1 or 2");
  if (!(radius > 0.0)) throw Error(ErrorKind::input, "models", "bump radius must be positive");
  JumpSizeDensity d;
  d.dim_ = dim;
  d.family_ = JumpFamily::bump;
  d.radius_ = radius;
  d.mean_ = Vec::Zero(dim);
  const QuadratureRule rule = composite_gauss_legendre(200, 20, 0.0, 1.0);
  double mass = 0.0;
  if (dim == 1) {
    mass = 2.0 * radius * rule.integrate([](double u) { return bump_profile(u * u); });
  } else {
    mass = 2.0 * std::numbers::pi * radius * radius * rule.integrate([](double r) { return r * bump_profile(r * r); });
  }
  d.norm_ = 1.0 / mass;
  d.max_value_ = d.norm_ * std::exp(-1.0);
  return d;
}

JumpSizeDensity JumpSizeDensity::truncated_gaussian(int dim, double scale, double radius, std::optional<Vec> mean) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::input, "models", "jump density dimension must be 1 or 2");
  if (!(scale > 0.0) || !(radius > 0.0))
    throw Error(ErrorKind::input, "models", "truncated Gaussian needs positive scale and radius");
  JumpSizeDensity d;
  d.dim_ = dim;
  d.family_ = JumpFamily::truncated_gaussian;
  d.radius_ = radius;
  d.scale_ = scale;
  d.mean_ = mean.value_or(Vec::Zero(dim));
  if (d.mean_.size() != dim) throw Error(ErrorKind::input, "models", "truncated Gaussian mean has wrong dimension");
  if ((d.mean_.array().abs() >= radius).any())
    throw Error(ErrorKind::validation, "models", "truncated Gaussian shift must lie strictly inside the support");
  double mass = 1.0;
  const double c = scale * std::numbers::sqrt2;
  for (int k = 0; k < dim; ++k) {
    const double m = d.mean_(k);
    mass *= scale * std::sqrt(std::numbers::pi / 2.0) * (std::erf((radius - m) / c) + std::erf((radius + m) / c));
  }
  d.norm_ = 1.0 / mass;
  d.max_value_ = d.norm_;
  return d;
}

bool JumpSizeDensity::in_support(const Vec& z) const {
  if (family_ == JumpFamily::bump) return z.squaredNorm() < radius_ * radius_;
  return (z.array().abs() <= radius_).all();
}

double JumpSizeDensity::operator()(const Vec& z) const {
  if (family_ == JumpFamily::bump) return norm_ * bump_profile(z.squaredNorm() / (radius_ * radius_));
  if (!in_support(z)) return 0.0;
  return norm_ * std::exp(-(z - mean_).squaredNorm() / (2.0 * scale_ * scale_));
}

Vec JumpSizeDensity::gradient(const Vec& z) const {
  if (!in_support(z)) return Vec::Zero(dim_);
  const double v = (*this)(z);
  if (family_ == JumpFamily::bump) {
    const double a2 = radius_ * radius_;
    const double s = 1.0 - z.squaredNorm() / a2;
    return v * (-2.0 / a2) / (s * s) * z;
  }
  return -v / (scale_ * scale_) * (z - mean_);
}

double JumpSizeDensity::audit_integral(int panels_per_dim, int order) const {
  const QuadratureRule rule = composite_gauss_legendre(panels_per_dim, order, -radius_, radius_);
  double total = 0.0;
  if (dim_ == 1) {
    Vec z(1);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      z(0) = rule.nodes[i];
      total += rule.weights[i] * (*this)(z);
    }
    return total;
  }
  Vec z(2);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double row = 0.0;
    z(0) = rule.nodes[i];
    for (std::size_t j = 0; j < rule.size(); ++j) {
      z(1) = rule.nodes[j];
      row += rule.weights[j] * (*this)(z);
    }
    total += rule.weights[i] * row;
  }
  return total;
}

nlohmann::json JumpSizeDensity::to_json() const {
  nlohmann::json j;
  j["family"] = family_ == JumpFamily::bump ? "bump" : "truncated_gaussian";
  j["dimension"] = dim_;
  j["radius"] = radius_;
  if (family_ == JumpFamily::truncated_gaussian) {
    j["scale"] = scale_;
    j["mean"] = std::vector<double>(mean_.data(), mean_.data() + mean_.size());
  }
  j["normalization"] = norm_;
  return j;
}

SupportRule support_rule(const JumpSizeDensity& density, int nodes_per_dim, int panels) {
  const double a = density.radius();
  const QuadratureRule rule = composite_gauss_legendre(panels, nodes_per_dim, -a, a);
  SupportRule out;
  auto push = [&](const Vec& z, double w) {
    const double v = density(z);
    if (v <= 0.0) return;
    out.nodes.push_back(z);
    out.weights.push_back(w);
    out.density.push_back(v);
  };
  if (density.dim() == 1) {
    for (std::size_t i = 0; i < rule.size(); ++i) push(make_vec({rule.nodes[i]}), rule.weights[i]);
  } else {
    for (std::size_t i = 0; i < rule.size(); ++i)
      for (std::size_t j = 0; j < rule.size(); ++j)
        push(make_vec({rule.nodes[i], rule.nodes[j]}), rule.weights[i] * rule.weights[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FiniteActivityModel
// ---------------------------------------------------------------------------

std::vector<std::string> FiniteActivityModel::state_variables(int dim) {
  if (dim == 1) return {"x"};
  if (dim == 2) return {"x1", "x2"};
  throw Error(ErrorKind::input, "models", "dimension must be 1 or 2");
}

FiniteActivityModel::FiniteActivityModel(int dim, std::vector<Expr> drift, double sigma, Expr rate, JumpSizeDensity jump)
    : dim_(dim), drift_(std::move(drift)), sigma_(sigma), rate_(std::move(rate)), jump_(std::move(jump)) {
  const auto vars = state_variables(dim);
  if (static_cast<int>(drift_.size()) != dim)
    throw Error(ErrorKind::input, "models", "drift needs one expression per dimension");
  for (const auto& b : drift_)
    if (b.variables() != vars) throw Error(ErrorKind::input, "models", "drift expressions must use the state variables");
  if (rate_.variables() != vars) throw Error(ErrorKind::input, "models", "rate expression must use the state variables");
  if (jump_.dim() != dim) throw Error(ErrorKind::input, "models", "jump density dimension mismatch");
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) throw Error(ErrorKind::input, "models", "sigma must be finite and non-negative");

  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) drift_jac_.push_back(drift_[i].derivative(static_cast<std::size_t>(j)));
  divergence_ = drift_jac_[0];
  for (int i = 1; i < dim; ++i) divergence_ = divergence_ + drift_jac_[static_cast<std::size_t>(i * dim + i)];
  for (int j = 0; j < dim; ++j) divergence_grad_.push_back(divergence_.derivative(static_cast<std::size_t>(j)));
  for (int j = 0; j < dim; ++j) rate_grad_.push_back(rate_.derivative(static_cast<std::size_t>(j)));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) rate_hess_.push_back(rate_grad_[i].derivative(static_cast<std::size_t>(j)));
}

FiniteActivityModel FiniteActivityModel::from_strings(int dim, const std::vector<std::string>& drift, double sigma,
                                                      const std::string& rate, JumpSizeDensity jump) {
  const auto vars = state_variables(dim);
  std::vector<Expr> b;
  for (const auto& s : drift) b.push_back(Expr::parse(s, vars));
  return FiniteActivityModel(dim, std::move(b), sigma, Expr::parse(rate, vars), std::move(jump));
}

Vec FiniteActivityModel::drift(const Vec& x) const {
  Vec out(dim_);
  for (int i = 0; i < dim_; ++i) out(i) = drift_[static_cast<std::size_t>(i)](x);
  return out;
}

Mat FiniteActivityModel::drift_jacobian(const Vec& x) const {
  Mat out(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = drift_jac_[static_cast<std::size_t>(i * dim_ + j)](x);
  return out;
}

double FiniteActivityModel::drift_divergence(const Vec& x) const { return divergence_(x); }

Vec FiniteActivityModel::drift_divergence_gradient(const Vec& x) const {
  Vec out(dim_);
  for (int j = 0; j < dim_; ++j) out(j) = divergence_grad_[static_cast<std::size_t>(j)](x);
  return out;
}

Vec FiniteActivityModel::rate_gradient(const Vec& x) const {
  Vec out(dim_);
  for (int j = 0; j < dim_; ++j) out(j) = rate_grad_[static_cast<std::size_t>(j)](x);
  return out;
}

Mat FiniteActivityModel::rate_hessian(const Vec& x) const {
  Mat out(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = rate_hess_[static_cast<std::size_t>(i * dim_ + j)](x);
  return out;
}

FiniteActivityModel FiniteActivityModel::with_scaled_rate(double factor) const {
  return with_rate(factor * rate_);
}

FiniteActivityModel FiniteActivityModel::with_rate(const Expr& rate) const {
  return FiniteActivityModel(dim_, drift_, sigma_, rate, jump_);
}

nlohmann::json FiniteActivityModel::to_json() const {
  nlohmann::json j;
  j["kind"] = "finite";
  j["dimension"] = dim_;
  std::vector<std::string> b;
  for (const auto& e : drift_) b.push_back(e.to_string());
  j["drift"] = b;
  j["sigma"] = sigma_;
  j["rate"] = rate_.to_string();
  j["jump"] = jump_.to_json();
  return j;
}

// ---------------------------------------------------------------------------
// InfiniteActivityModel
// ---------------------------------------------------------------------------

InfiniteActivityModel InfiniteActivityModel::from_expressions(const std::string& drift, double sigma,
                                                              const std::string& jump_map,
                                                              const std::string& intensity,
                                                              const std::string& dominating, double alpha) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::input, "models", "sigma must be non-negative");
  InfiniteActivityModel m;
  m.drift_ = Expr::parse(drift, {"x"});
  m.drift_dx_ = m.drift_.derivative("x");
  m.sigma_ = sigma;
  m.F_ = Expr::parse(jump_map, {"x", "z"});
  m.F_dx_ = m.F_.derivative("x");
  m.F_dz_ = m.F_.derivative("z");
  const Expr nu = Expr::parse(intensity, {"x", "z"});
  m.nu_ = [nu](double x, double z) { return nu({x, z}); };
  m.intensity_text_ = nu.to_string();
  if (!dominating.empty()) m.dominating_ = Expr::parse(dominating, {"z"});
  m.alpha_ = alpha;
  return m;
}

InfiniteActivityModel InfiniteActivityModel::embed(const FiniteActivityModel& model) {
  if (model.dim() != 1) throw Error(ErrorKind::input, "models", "only scalar models can be embedded");
  const JumpSizeDensity jump = model.jump();
  // First moment of the small jumps, absorbed into the drift.
  const double a = std::min(jump.radius(), 1.0);
  const QuadratureRule rule = composite_gauss_legendre(64, 12, -a, a);
  Vec z(1);
  double first_moment = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    z(0) = rule.nodes[i];
    first_moment += rule.weights[i] * rule.nodes[i] * jump(z);
  }

  InfiniteActivityModel m;
  const Expr& rate = model.rate_expression();
  m.drift_ = first_moment == 0.0 ? model.drift_expressions()[0] : model.drift_expressions()[0] + first_moment * rate;
  m.drift_dx_ = m.drift_.derivative("x");
  m.sigma_ = model.sigma();
  m.F_ = Expr::variable("z", {"x", "z"});
  m.F_dx_ = m.F_.derivative("x");
  m.F_dz_ = m.F_.derivative("z");
  m.nu_ = [rate, jump](double x, double zz) {
    Vec v(1);
    v(0) = zz;
    const double j = jump(v);
    return j == 0.0 ? 0.0 : rate({x}) * j;
  };
  m.intensity_text_ = "(" + rate.to_string() + ") * nu_J(z)";
  m.alpha_ = 0.0;
  m.embedded_ = true;
  m.support_radius_ = jump.radius();
  return m;
}

double InfiniteActivityModel::dominating(double z) const {
  if (!dominating_) throw Error(ErrorKind::input, "models", "model has no dominating density");
  return (*dominating_)({z});
}

nlohmann::json InfiniteActivityModel::to_json() const {
  nlohmann::json j;
  j["kind"] = embedded_ ? "infinite (embedded finite-activity)" : "infinite";
  j["drift"] = drift_.to_string();
  j["sigma"] = sigma_;
  j["jump_map"] = F_.to_string();
  j["intensity"] = intensity_text_;
  if (dominating_) j["dominating"] = dominating_->to_string();
  j["alpha"] = alpha_;
  return j;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["model_kind"] = model_kind;
  j["passed"] = passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    cj["min"] = c.min_value;
    cj["max"] = c.max_value;
    cj["witness"] = c.witness;
    if (!c.detail.empty()) cj["detail"] = c.detail;
    arr.push_back(cj);
  }
  j["checks"] = arr;
  return j;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << model_kind << " model validation: " << (passed() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : checks) {
    os << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name << "  min=" << c.min_value << " max=" << c.max_value;
    if (!c.witness.empty()) {
      os << " witness=(";
      for (std::size_t i = 0; i < c.witness.size(); ++i) os << (i ? ", " : "") << c.witness[i];
      os << ")";
    }
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  return os.str();
}

namespace {

/// Running min/max with witness points.
struct Extremes {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  std::vector<double> argmax;
  std::vector<double> nonfinite;

  void add(double v, std::vector<double> at) {
    if (!std::isfinite(v)) {
      if (nonfinite.empty()) nonfinite = at;
      return;
    }
    if (v < min) {
      min = v;
      argmin = at;
    }
    if (v > max) {
      max = v;
      argmax = std::move(at);
    }
  }
};

template <class Fn>
void for_each_node(const Box& grid, int dim, Fn&& fn) {
  const int n = std::max(grid.resolution, 2);
  Vec x(dim);
  auto coord = [&](int k, int i) { return grid.lo(k) + (grid.hi(k) - grid.lo(k)) * i / (n - 1); };
  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      x(0) = coord(0, i);
      fn(x);
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        x(0) = coord(0, i);
        x(1) = coord(1, j);
        fn(x);
      }
  }
}

std::vector<double> to_std(const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

}  // namespace

ValidationReport validate_finite_model(const FiniteActivityModel& model, const Box& grid,
                                       const FiniteValidationOptions& options) {
  if (grid.lo.size() != model.dim() || grid.hi.size() != model.dim() || (grid.hi.array() <= grid.lo.array()).any() ||
      grid.resolution < 2)
    throw Error(ErrorKind::input, "models", "validation grid is degenerate or has the wrong dimension");

  ValidationReport report;
  report.model_kind = "finite-activity";

  {
    CheckResult c;
    c.name = "sigma_positive";
    c.min_value = c.max_value = model.sigma();
    c.passed = model.sigma() > 0.0;
    if (!c.passed) c.detail = "probability-flow construction needs sigma > 0";
    report.checks.push_back(c);
  }

  Extremes rate;
  Extremes drift_norm;
  for_each_node(grid, model.dim(), [&](const Vec& x) {
    rate.add(model.rate(x), to_std(x));
    drift_norm.add(model.drift(x).norm(), to_std(x));
  });
  {
    CheckResult c;
    c.name = "rate_positive";
    c.min_value = rate.min;
    c.max_value = rate.max;
    if (!rate.nonfinite.empty()) {
      c.passed = false;
      c.witness = rate.nonfinite;
      c.detail = "rate is not finite";
    } else {
      c.passed = options.allow_zero_rate ? rate.min >= 0.0 : rate.min > 0.0;
      c.witness = rate.argmin;
      if (!c.passed) c.detail = options.allow_zero_rate ? "rate negative" : "rate not strictly positive";
    }
    report.checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "drift_finite";
    c.min_value = drift_norm.min;
    c.max_value = drift_norm.max;
    c.passed = drift_norm.nonfinite.empty();
    c.witness = c.passed ? drift_norm.argmax : drift_norm.nonfinite;
    report.checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "jump_density_normalized";
    const double integral = model.jump().audit_integral();
    c.min_value = c.max_value = integral;
    c.passed = std::fabs(integral - 1.0) <= kNormalizationTolerance;
    if (!c.passed) c.detail = "quadrature integral differs from 1 by more than 1e-10";
    report.checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "jump_density_positive_at_origin";
    c.min_value = c.max_value = model.jump().at_zero();
    c.passed = c.min_value > 0.0;
    report.checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "jump_support_within_quarter_box";
    const double width = (grid.hi - grid.lo).minCoeff();
    c.min_value = model.jump().radius();
    c.max_value = 0.25 * width;
    c.passed = model.jump().radius() <= 0.25 * width;
    if (!c.passed) c.detail = "jump support radius exceeds a quarter of the box width";
    report.checks.push_back(c);
  }
  return report;
}

ValidationReport validate_infinite_model(const InfiniteActivityModel& model, const InfiniteValidationGrid& grid,
                                         double eta) {
  if (!(grid.x_hi > grid.x_lo) || grid.x_nodes < 2 || !(grid.z_inner > 0.0) || !(grid.z_outer > grid.z_inner) ||
      grid.z_nodes < 2 || !(grid.band_lo > 0.0) || !(grid.band_hi > grid.band_lo) || grid.band_nodes < 2)
    throw Error(ErrorKind::input, "models", "infinite-activity validation grid is degenerate");

  ValidationReport report;
  report.model_kind = "infinite-activity";

  std::vector<double> xs;
  for (int i = 0; i < grid.x_nodes; ++i) xs.push_back(grid.x_lo + (grid.x_hi - grid.x_lo) * i / (grid.x_nodes - 1));
  auto geometric = [](double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
      const double z = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
      out.push_back(z);
      out.push_back(-z);
    }
    return out;
  };
  const std::vector<double> annulus = geometric(grid.z_inner, grid.z_outer, grid.z_nodes);
  const std::vector<double> band = geometric(grid.band_lo, grid.band_hi, grid.band_nodes);
  std::vector<double> all_z = annulus;
  all_z.insert(all_z.end(), band.begin(), band.end());

  {
    CheckResult c;
    c.name = "sigma_positive";
    c.min_value = c.max_value = model.sigma();
    c.passed = model.sigma() > 0.0;
    report.checks.push_back(c);
  }
  {
    CheckResult c;
    c.name = "alpha_in_range";
    c.min_value = c.max_value = model.alpha();
    c.passed = model.alpha() > 0.0 && model.alpha() < 2.0;
    report.checks.push_back(c);
  }

  Extremes nu_values, domination_gap, f_at_zero, dz, one_plus_dx, drift;
  for (double x : xs) {
    drift.add(model.drift(x), {x});
    f_at_zero.add(std::fabs(model.jump_map(x, 0.0)), {x, 0.0});
    dz.add(std::fabs(model.jump_map_dz(x, 0.0)), {x, 0.0});
    one_plus_dx.add(std::fabs(1.0 + model.jump_map_dx(x, 0.0)), {x, 0.0});
    for (double z : all_z) {
      dz.add(std::fabs(model.jump_map_dz(x, z)), {x, z});
      one_plus_dx.add(std::fabs(1.0 + model.jump_map_dx(x, z)), {x, z});
    }
    for (double z : annulus) {
      const double nu = model.intensity(x, z);
      nu_values.add(nu, {x, z});
      if (model.has_dominating()) domination_gap.add(nu - model.dominating(z), {x, z});
    }
  }

  auto extreme_check = [&](const std::string& name, const Extremes& e, bool passed, bool use_min,
                           const std::string& detail) {
    CheckResult c;
    c.name = name;
    c.min_value = e.min;
    c.max_value = e.max;
    if (!e.nonfinite.empty()) {
      c.passed = false;
      c.witness = e.nonfinite;
      c.detail = "non-finite value";
    } else {
      c.passed = passed;
      c.witness = use_min ? e.argmin : e.argmax;
      if (!passed) c.detail = detail;
    }
    report.checks.push_back(c);
  };

  extreme_check("drift_finite", drift, true, false, "");
  extreme_check("intensity_positive", nu_values, nu_values.min > 0.0, true, "intensity must be positive off the origin");
  if (model.has_dominating()) {
    const double tol = 1e-12 * std::max(1.0, std::fabs(domination_gap.max));
    extreme_check("dominated_by_g", domination_gap, domination_gap.max <= tol, false, "nu(x,z) exceeds g(z)");
  } else {
    CheckResult c;
    c.name = "dominated_by_g";
    c.passed = false;
    c.detail = "no dominating density supplied";
    report.checks.push_back(c);
  }
  extreme_check("jump_map_vanishes_at_zero", f_at_zero, f_at_zero.max <= 1e-12, false, "F(x,0) != 0");
  extreme_check("dz_bounded_below", dz, dz.min > eta, true, "|d2 F| <= eta");
  extreme_check("one_plus_dx_bounded_below", one_plus_dx, one_plus_dx.min > eta, true, "|1 + d1 F| <= eta");

  if (model.has_dominating()) {
    Extremes f_band, zf_prime;
    const double alpha = model.alpha();
    auto f = [&](double z) { return model.dominating(z) * std::pow(std::fabs(z), alpha + 1.0); };
    for (double z : band) {
      f_band.add(f(z), {z});
      const double h = 1e-4 * std::fabs(z);
      zf_prime.add(std::fabs(z * (f(z + h) - f(z - h)) / (2.0 * h)), {z});
    }
    const bool bounded = f_band.min > 0.0 && std::isfinite(f_band.max) && f_band.max / f_band.min <= 1e6;
    extreme_check("power_law_ratio_bounded", f_band, bounded, true,
                  "g(z)|z|^(alpha+1) not bounded away from 0 and infinity near the origin");
    extreme_check("log_derivative_bounded", zf_prime, std::isfinite(zf_prime.max), false, "|z f'(z)| unbounded");
  } else {
    CheckResult c;
    c.name = "power_law_ratio_bounded";
    c.passed = false;
    c.detail = "no dominating density supplied";
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace jumpom
