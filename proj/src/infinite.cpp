#include "jumpom/infinite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "jumpom/quadrature.hpp"

namespace jumpom {

namespace {

constexpr double kNoBracket = 1e6;

/// Root of a monotone scalar function by Newton, then bisection on a bracket
/// grown geometrically from `start` in the direction that changes the sign.
template <class G, class DG>
std::optional<double> monotone_root(G&& g, DG&& dg, double start, double tol, int max_iter) {
  double y = start;
  for (int it = 0; it < max_iter; ++it) {
    const double gy = g(y);
    if (!std::isfinite(gy)) break;
    if (std::fabs(gy) <= tol) return y;
    const double d = dg(y);
    if (!(std::fabs(d) > 0.0) || !std::isfinite(d)) break;
    y -= gy / d;
    if (!std::isfinite(y)) break;
  }

  double a = start;
  double ga = g(a);
  if (!std::isfinite(ga)) return std::nullopt;
  if (ga == 0.0) return a;
  double step = std::max(1e-3, 1e-3 * std::fabs(start));
  double b = a;
  double gb = ga;
  bool found = false;
  for (int k = 0; k < 200 && std::fabs(b - start) < kNoBracket; ++k) {
    for (double dir : {1.0, -1.0}) {
      const double c = start + dir * step;
      const double gc = g(c);
      if (std::isfinite(gc) && (gc > 0.0) != (ga > 0.0)) {
        b = c;
        gb = gc;
        found = true;
        break;
      }
    }
    if (found) break;
    step *= 2.0;
  }
  if (!found) return std::nullopt;
  if (a > b) {
    std::swap(a, b);
    std::swap(ga, gb);
  }
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if (std::fabs(gm) <= tol || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(m)))
      return m;
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TransportMap::TransportMap(const InfiniteActivityModel& model, double theta, double z, double tol, int max_iter)
    : model_(model), theta_(theta), z_(z), tol_(tol), max_iter_(max_iter) {}

double TransportMap::forward(double y) const { return y + theta_ * model_.jump_map(y, z_); }

double TransportMap::inverse(double x) const {
  const double tol = tol_ * std::max(1.0, std::fabs(x));
  auto g = [&](double y) { return forward(y) - x; };
  auto dg = [&](double y) { return 1.0 + theta_ * model_.jump_map_dx(y, z_); };
  const auto y = monotone_root(g, dg, x - theta_ * model_.jump_map(x, z_), tol, max_iter_);
  if (!y) {
    std::ostringstream os;
    os << "cannot invert x -> x + theta F(x, z) at x=" << x << ", theta=" << theta_ << ", z=" << z_
       << "; 1 + theta dF/dx must stay bounded away from zero";
    throw Error(ErrorKind::numerical, "infinite", os.str());
  }
  return *y;
}

double TransportMap::jacobian_at_preimage(double y) const {
  return 1.0 / std::fabs(1.0 + theta_ * model_.jump_map_dx(y, z_));
}

double TransportMap::jacobian(double x) const { return jacobian_at_preimage(inverse(x)); }

double invert_transport(const TransportMap& map, double x) { return map.inverse(x); }

NuFValue nu_F(const InfiniteActivityModel& model, double y, double u) {
  NuFValue out;
  if (u == 0.0) throw Error(ErrorKind::input, "infinite", "nu_F is undefined at u = 0");
  auto h = [&](double z) { return model.jump_map(y, z) - u; };
  auto dh = [&](double z) { return model.jump_map_dz(y, z); };
  const double slope0 = model.jump_map_dz(y, 0.0);
  const double start = std::fabs(slope0) > 0.0 ? u / slope0 : u;
  const auto z = monotone_root(h, dh, start, 1e-13 * std::max(1.0, std::fabs(u)), 50);
  if (!z) {
    out.out_of_range = true;
    return out;
  }
  out.z_star = *z;
  const double dz = std::fabs(model.jump_map_dz(y, *z));
  if (!(dz > 0.0)) throw Error(ErrorKind::validation, "infinite", "dF/dz vanishes at the jump preimage");
  out.value = model.intensity(y, *z) / dz;
  return out;
}

nlohmann::json DomEvaluation::to_json() const {
  nlohmann::json j;
  j["total"] = total;
  j["kinetic"] = kinetic;
  j["divergence"] = divergence;
  j["n"] = n;
  j["dt"] = dt;
  j["excluded_nodes"] = excluded_nodes;
  j["excluded_measure"] = excluded_measure;
  j["omitted_small_jump"] = omitted_small_jump;
  j["quadrature_sensitivity"] = quadrature_sensitivity;
  if (!warning.empty()) j["warning"] = warning;
  return j;
}

namespace {

struct ZRule {
  QuadratureRule all;    // both signs of z, |z| in [cutoff, z_max]
  QuadratureRule small;  // the subset with |z| < 1
};

ZRule build_z_rule(const InfiniteActivityModel& model, const DomQuadrature& q) {
  double zmax = q.z_max;
  if (!(zmax > 0.0)) zmax = std::isfinite(model.support_radius()) ? model.support_radius() : 10.0;
  if (!(q.z_cutoff > 0.0) || !(q.z_cutoff < zmax))
    throw Error(ErrorKind::input, "infinite", "need 0 < z_cutoff < z_max");
  ZRule r;
  auto add = [&](const QuadratureRule& half, bool small) {
    for (std::size_t k = 0; k < half.size(); ++k) {
      for (double s : {1.0, -1.0}) {
        r.all.nodes.push_back(s * half.nodes[k]);
        r.all.weights.push_back(half.weights[k]);
        if (small) {
          r.small.nodes.push_back(s * half.nodes[k]);
          r.small.weights.push_back(half.weights[k]);
        }
      }
    }
  };
  // Split at |z| = 1 so the compensator cut falls on a panel edge.
  const double inner = std::min(1.0, zmax);
  add(geometric_gauss_legendre(q.z_panels, q.z_order, q.z_cutoff, inner), true);
  if (zmax > 1.0) {
    const int outer_panels = std::max(4, static_cast<int>(std::ceil(4.0 * std::log2(zmax) + 4.0)));
    add(composite_gauss_legendre(outer_panels, q.z_order, 1.0, zmax), false);
  }
  return r;
}

struct NonlocalCounter {
  std::size_t excluded = 0;
  double measure = 0.0;
};

double nonlocal_on(const InfiniteActivityModel& model, double x, double y, const QuadratureRule& zr,
                   const QuadratureRule& tr, NonlocalCounter* counter) {
  if (x == y) {
    std::ostringstream os;
    os << "consecutive knots coincide at x=" << x << "; the density ratio is undefined";
    throw Error(ErrorKind::input, "infinite", os.str());
  }
  const NuFValue denom = nu_F(model, y, x - y);
  double sum = 0.0;
  for (std::size_t a = 0; a < tr.size(); ++a) {
    const double theta = tr.nodes[a];
    for (std::size_t k = 0; k < zr.size(); ++k) {
      const double z = zr.nodes[k];
      const TransportMap map(model, theta, z);
      const double pre = map.inverse(x);
      const double nu = model.intensity(pre, z);
      if (nu == 0.0) continue;
      const double arg = pre - y;
      if (arg == 0.0) {
        if (counter) {
          ++counter->excluded;
          counter->measure += tr.weights[a] * zr.weights[k];
        }
        continue;
      }
      const NuFValue num = nu_F(model, y, arg);
      if (num.value == 0.0) continue;
      if (!(denom.value > 0.0)) {
        std::ostringstream os;
        os << "nu_F(y, x - y) vanishes at y=" << y << ", x=" << x
           << " while the transported density does not; the increment is outside the jump range";
        throw Error(ErrorKind::numerical, "infinite", os.str());
      }
      sum += tr.weights[a] * zr.weights[k] * model.jump_map(pre, z) * map.jacobian_at_preimage(pre) *
             (num.value / denom.value) * nu;
    }
  }
  return sum;
}

double compensator(const InfiniteActivityModel& model, double x, const QuadratureRule& small) {
  double s = 0.0;
  for (std::size_t k = 0; k < small.size(); ++k) {
    const double z = small.nodes[k];
    const double nu = model.intensity(x, z);
    if (nu != 0.0) s += small.weights[k] * model.jump_map(x, z) * nu;
  }
  return s;
}

double omitted_small_jump(const InfiniteActivityModel& model, double x_ref, double cutoff) {
  const QuadratureRule r = geometric_gauss_legendre(30, 8, cutoff * 1e-12, cutoff);
  double s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double z = r.nodes[k];
    const double m = model.has_dominating() ? model.dominating(z) + model.dominating(-z)
                                            : model.intensity(x_ref, z) + model.intensity(x_ref, -z);
    s += r.weights[k] * z * z * m;
  }
  return s;
}

}  // namespace

double nonlocal_drift(const InfiniteActivityModel& model, double x, double y, const DomQuadrature& quad) {
  const ZRule zr = build_z_rule(model, quad);
  return nonlocal_on(model, x, y, zr.all, gauss_legendre(quad.theta_nodes, 0.0, 1.0), nullptr);
}

DomEvaluation discrete_om_action(const InfiniteActivityModel& model, const std::vector<double>& x, double dt,
                                 const DomQuadrature& quad) {
  if (x.size() < 2) throw Error(ErrorKind::input, "infinite", "need at least two knots");
  if (!(dt > 0.0)) throw Error(ErrorKind::input, "infinite", "time step must be positive");
  if (!(model.sigma() > 0.0)) throw Error(ErrorKind::validation, "infinite", "action needs sigma > 0");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] == x[i - 1]) {
      std::ostringstream os;
      os << "knots " << i - 1 << " and " << i << " coincide (x=" << x[i] << "); the discrete action is undefined";
      throw Error(ErrorKind::input, "infinite", os.str());
    }

  const ZRule zr = build_z_rule(model, quad);
  const QuadratureRule tr = gauss_legendre(quad.theta_nodes, 0.0, 1.0);
  const double h = quad.fd_step;
  const double s2 = model.sigma() * model.sigma();
  const std::size_t n = x.size() - 1;

  DomEvaluation ev;
  ev.n = n;
  ev.dt = dt;
  ev.steps.resize(n);
  std::vector<NonlocalCounter> counters(n);
  parallel_for(n, quad.threads, [&](std::size_t k) {
    const std::size_t i = k + 1;
    const double xi = x[i];
    const double y = x[i - 1];
    DomStep& st = ev.steps[k];
    st.nonlocal = nonlocal_on(model, xi, y, zr.all, tr, &counters[k]);
    const double comp = compensator(model, xi, zr.small);
    st.residual = (xi - y) / dt - model.drift(xi) + comp - st.nonlocal;
    st.kinetic = st.residual * st.residual * dt / (2.0 * s2);

    const double dcomp = (compensator(model, xi + h, zr.small) - compensator(model, xi - h, zr.small)) / (2.0 * h);
    const double dnl =
        (nonlocal_on(model, xi + h, y, zr.all, tr, nullptr) - nonlocal_on(model, xi - h, y, zr.all, tr, nullptr)) /
        (2.0 * h);
    st.divergence = 0.5 * dt * (model.drift_derivative(xi) - dcomp + dnl);
  });
  for (std::size_t k = 0; k < n; ++k) {
    ev.kinetic += ev.steps[k].kinetic;
    ev.divergence += ev.steps[k].divergence;
    ev.excluded_nodes += counters[k].excluded;
    ev.excluded_measure += counters[k].measure;
  }
  ev.total = ev.kinetic + ev.divergence;
  ev.omitted_small_jump = omitted_small_jump(model, x.front(), quad.z_cutoff);

  // When ν_F(y, ·) is singular at 0 the θ-integral in NL need not converge,
  // and refining the rules then moves the value by O(1).
  DomQuadrature fine = quad;
  fine.z_panels *= 2;
  fine.theta_nodes *= 2;
  const ZRule zf = build_z_rule(model, fine);
  const QuadratureRule tf = gauss_legendre(fine.theta_nodes, 0.0, 1.0);
  for (std::size_t k : {std::size_t{0}, n / 2, n - 1}) {
    const double coarse = ev.steps[k].nonlocal;
    const double refined = nonlocal_on(model, x[k + 1], x[k], zf.all, tf, nullptr);
    ev.quadrature_sensitivity =
        std::max(ev.quadrature_sensitivity, std::fabs(refined - coarse) / std::max(1.0, std::fabs(refined)));
  }
  if (ev.quadrature_sensitivity > 1e-3) {
    std::ostringstream os;
    os << "nonlocal term changes by " << ev.quadrature_sensitivity
       << " (relative) under quadrature refinement; the action is not resolved for this model and path";
    ev.warning = os.str();
  }
  return ev;
}

DomEvaluation discrete_om_action(const InfiniteActivityModel& model, const DiscretePath& path,
                                 const DomQuadrature& quad) {
  if (path.dim() != 1) throw Error(ErrorKind::input, "infinite", "the discrete action is scalar only");
  if (path.steps() == 0) throw Error(ErrorKind::input, "infinite", "path has no steps");
  std::vector<double> x(static_cast<std::size_t>(path.x.rows()));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = path.x(static_cast<Eigen::Index>(i), 0);
  return discrete_om_action(model, x, path.horizon() / static_cast<double>(path.steps()), quad);
}

}  // namespace jumpom
