#include "jumpom/om.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "jumpom/quadrature.hpp"

namespace jumpom {

// ---------------------------------------------------------------------------
// Jump correction terms
// ---------------------------------------------------------------------------

JumpCorrection::JumpCorrection(const FiniteActivityModel& model, JumpQuadratureSpec spec) : model_(&model) {
  const JumpSizeDensity& nu = model.jump();
  const int d = model.dim();
  const double nu0 = nu.at_zero();
  const Vec grad0 = nu.gradient(Vec::Zero(d));
  const SupportRule z = support_rule(nu, spec.z_nodes, spec.z_panels);
  const QuadratureRule theta = gauss_legendre(spec.theta_nodes, 0.0, 1.0);
  ell_sum_ = Vec::Zero(d);
  for (std::size_t q = 0; q < z.size(); ++q) {
    const Vec& zq = z.nodes[q];
    const double wz = z.weights[q] * z.density[q];
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const Vec back = -theta.nodes[k] * zq;
      const double w = wz * theta.weights[k];
      const double nu_back = nu(back);
      const Vec bracket = (nu.gradient(back) * nu0 - nu_back * grad0) / (nu0 * nu0);
      shift_.push_back(-back);
      ell_weight_.push_back((w * nu_back / nu0) * zq);
      tilde_weight_.push_back(w * zq.dot(bracket));
      ell_sum_ += ell_weight_.back();
      tilde_sum_ += tilde_weight_.back();
    }
  }
}

JumpTerms JumpCorrection::operator()(const Vec& x, bool with_derivatives) const {
  const FiniteActivityModel& m = *model_;
  const int d = m.dim();
  JumpTerms out;
  if (with_derivatives) {
    out.ell_jacobian = Mat::Zero(d, d);
    out.grad_div_ell = Vec::Zero(d);
    out.grad_ell_tilde = Vec::Zero(d);
  }
  if (m.rate_is_constant()) {
    const double lam = m.rate(x);
    out.ell = lam * ell_sum_;
    out.div_ell = 0.0;
    out.ell_tilde = lam * tilde_sum_;
    return out;
  }
  out.ell = Vec::Zero(d);
  for (std::size_t i = 0; i < shift_.size(); ++i) {
    const Vec y = x - shift_[i];
    const double lam = m.rate(y);
    const Vec& w = ell_weight_[i];
    out.ell += lam * w;
    out.ell_tilde += tilde_weight_[i] * lam;
    const Vec grad = m.rate_gradient(y);
    out.div_ell += w.dot(grad);
    if (with_derivatives) {
      out.ell_jacobian += w * grad.transpose();
      out.grad_div_ell += m.rate_hessian(y) * w;
      out.grad_ell_tilde += tilde_weight_[i] * grad;
    }
  }
  return out;
}

Vec ell_J(const FiniteActivityModel& model, const Vec& x, JumpQuadratureSpec spec) {
  return JumpCorrection(model, spec).ell(x);
}

double ell_tilde_J(const FiniteActivityModel& model, const Vec& x, JumpQuadratureSpec spec) {
  return JumpCorrection(model, spec).ell_tilde(x);
}

// ---------------------------------------------------------------------------
// SmoothPath
// ---------------------------------------------------------------------------

SmoothPath::SmoothPath(std::vector<Expr> components, double T) : components_(std::move(components)), T_(T) {
  if (components_.empty() || components_.size() > static_cast<std::size_t>(kMaxDim))
    throw Error(ErrorKind::input, "om", "path needs 1 or 2 components");
  if (!(T_ > 0.0)) throw Error(ErrorKind::input, "om", "path horizon must be positive");
  for (const auto& c : components_) {
    if (c.variables() != std::vector<std::string>{"t"})
      throw Error(ErrorKind::input, "om", "path components must be expressions in t");
    derivatives_.push_back(c.derivative("t"));
  }
  for (double t : {0.0, 0.5 * T_, T_}) {
    if (!value(t).allFinite() || !velocity(t).allFinite())
      throw Error(ErrorKind::validation, "om", "path or its derivative is not finite at t=" + std::to_string(t));
  }
}

SmoothPath SmoothPath::parse(const std::vector<std::string>& components, double T) {
  std::vector<Expr> e;
  for (const auto& s : components) e.push_back(Expr::parse(s, {"t"}));
  return SmoothPath(std::move(e), T);
}

Vec SmoothPath::value(double t) const {
  Vec v(dim());
  for (int k = 0; k < dim(); ++k) v(k) = components_[static_cast<std::size_t>(k)]({t});
  return v;
}

Vec SmoothPath::velocity(double t) const {
  Vec v(dim());
  for (int k = 0; k < dim(); ++k) v(k) = derivatives_[static_cast<std::size_t>(k)]({t});
  return v;
}

std::vector<std::string> SmoothPath::to_strings() const {
  std::vector<std::string> out;
  for (const auto& c : components_) out.push_back(c.to_string());
  return out;
}

// ---------------------------------------------------------------------------
// Action
// ---------------------------------------------------------------------------

nlohmann::json OmEvaluation::to_json() const {
  nlohmann::json j;
  j["total"] = total;
  j["kinetic"] = kinetic;
  j["divergence"] = divergence;
  j["ell_tilde"] = ell_tilde;
  j["t_panels"] = t_panels;
  j["t_order"] = t_order;
  j["jump_nodes"] = jump_nodes;
  j["estimated_error"] = estimated_error;
  if (!warning.empty()) j["warning"] = warning;
  return j;
}

OmIntegrand om_integrand(const Vec& velocity, const Vec& drift, double div_drift, const JumpTerms& jump,
                         double sigma) {
  OmIntegrand out;
  const Vec residual = velocity - drift - jump.ell;
  out.kinetic = residual.squaredNorm() / (2.0 * sigma * sigma);
  out.divergence = 0.5 * (div_drift + jump.div_ell);
  out.ell_tilde = 0.5 * jump.ell_tilde;
  return out;
}

namespace {

using PointTerms = std::function<OmIntegrand(const Vec& x, const Vec& v)>;

OmIntegrand integrate(const PointTerms& terms, const SmoothPath& path, double t0, double t1, int panels, int order) {
  const QuadratureRule rule = composite_gauss_legendre(panels, order, t0, t1);
  OmIntegrand sum;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    const OmIntegrand f = terms(path.value(t), path.velocity(t));
    sum.kinetic += rule.weights[i] * f.kinetic;
    sum.divergence += rule.weights[i] * f.divergence;
    sum.ell_tilde += rule.weights[i] * f.ell_tilde;
  }
  return sum;
}

OmEvaluation evaluate(const PointTerms& terms, const SmoothPath& path, const OmQuadrature& quad, double t0, double t1,
                      std::size_t jump_nodes) {
  if (t1 < 0.0) t1 = path.horizon();
  if (!(t0 >= 0.0) || !(t1 > t0) || t1 > path.horizon() * (1.0 + 1e-12))
    throw Error(ErrorKind::input, "om", "integration window must satisfy 0 <= t0 < t1 <= T");
  if (quad.t_panels < 2 || quad.t_order < 1) throw Error(ErrorKind::input, "om", "need at least 2 time panels");

  const OmIntegrand fine = integrate(terms, path, t0, t1, quad.t_panels, quad.t_order);
  const OmIntegrand coarse = integrate(terms, path, t0, t1, quad.t_panels / 2, quad.t_order);
  OmEvaluation out;
  out.kinetic = fine.kinetic;
  out.divergence = fine.divergence;
  out.ell_tilde = fine.ell_tilde;
  out.total = out.kinetic + out.divergence + out.ell_tilde;
  out.t_panels = quad.t_panels;
  out.t_order = quad.t_order;
  out.jump_nodes = jump_nodes;
  out.estimated_error = std::fabs(out.total - (coarse.kinetic + coarse.divergence + coarse.ell_tilde));
  if (out.estimated_error > quad.error_threshold * std::max(1.0, std::fabs(out.total))) {
    std::ostringstream os;
    os << "time quadrature error estimate " << out.estimated_error << " above threshold; increase t_panels beyond "
       << quad.t_panels;
    out.warning = os.str();
  }
  return out;
}

}  // namespace

OmEvaluation om_action(const FiniteActivityModel& model, const SmoothPath& path, const OmQuadrature& quad, double t0,
                       double t1) {
  if (path.dim() != model.dim()) throw Error(ErrorKind::input, "om", "path and model dimensions differ");
  if (!(model.sigma() > 0.0)) throw Error(ErrorKind::validation, "om", "OM action needs sigma > 0");
  const JumpCorrection jump(model, quad.jump);
  const PointTerms terms = [&](const Vec& x, const Vec& v) {
    return om_integrand(v, model.drift(x), model.drift_divergence(x), jump(x), model.sigma());
  };
  return evaluate(terms, path, quad, t0, t1, jump.nodes());
}

OmEvaluation classical_om_action(const std::vector<Expr>& drift, double sigma, const SmoothPath& path,
                                 const OmQuadrature& quad, double t0, double t1) {
  if (static_cast<int>(drift.size()) != path.dim()) throw Error(ErrorKind::input, "om", "drift and path dimensions differ");
  if (!(sigma > 0.0)) throw Error(ErrorKind::validation, "om", "OM action needs sigma > 0");
  const int d = path.dim();
  const auto vars = FiniteActivityModel::state_variables(d);
  std::vector<Expr> diag;
  for (int k = 0; k < d; ++k) {
    if (drift[static_cast<std::size_t>(k)].variables() != vars)
      throw Error(ErrorKind::input, "om", "drift expressions must use the state variables");
    diag.push_back(drift[static_cast<std::size_t>(k)].derivative(static_cast<std::size_t>(k)));
  }
  Expr divergence = diag[0];
  for (int k = 1; k < d; ++k) divergence = divergence + diag[static_cast<std::size_t>(k)];

  JumpTerms none;
  none.ell = Vec::Zero(d);
  const PointTerms terms = [&](const Vec& x, const Vec& v) {
    Vec b(d);
    for (int k = 0; k < d; ++k) b(k) = drift[static_cast<std::size_t>(k)](x);
    return om_integrand(v, b, divergence(x), none, sigma);
  };
  return evaluate(terms, path, quad, t0, t1, 0);
}

}  // namespace jumpom
