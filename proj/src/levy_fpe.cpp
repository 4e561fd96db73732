#include "jumpom/levy_fpe.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "jumpom/quadrature.hpp"

namespace jumpom {

// ---------------------------------------------------------------------------
// SpatialGrid / DensityField
// ---------------------------------------------------------------------------

double SpatialGrid::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= spacing(k);
  return v;
}

std::size_t SpatialGrid::size() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(nodes);
  return n;
}

Vec SpatialGrid::node(std::size_t flat) const {
  Vec x(dim);
  const auto m = static_cast<std::size_t>(nodes);
  if (dim == 1) {
    x(0) = lo(0) + (static_cast<double>(flat) + 0.5) * spacing(0);
  } else {
    x(0) = lo(0) + (static_cast<double>(flat / m) + 0.5) * spacing(0);
    x(1) = lo(1) + (static_cast<double>(flat % m) + 0.5) * spacing(1);
  }
  return x;
}

bool SpatialGrid::contains(const Vec& x) const {
  return x.size() == dim && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

DensityField::DensityField(SpatialGrid grid, Vec x0, double epsilon)
    : grid_(std::move(grid)), x0_(std::move(x0)), epsilon_(epsilon) {}

void DensityField::push_slice(double t, Eigen::VectorXd values, double clipped) {
  if (static_cast<std::size_t>(values.size()) != grid_.size())
    throw Error(ErrorKind::input, "levy_fpe", "slice size does not match the grid");
  if (!times_.empty() && !(t > times_.back()))
    throw Error(ErrorKind::input, "levy_fpe", "slice times must be strictly increasing");
  times_.push_back(t);
  values_.push_back(std::move(values));
  clipped_.push_back(clipped);
}

double DensityField::mass(std::size_t k) const { return values_.at(k).sum() * grid_.cell_volume(); }

double DensityField::value(const Vec& x, std::size_t k) const {
  const Eigen::VectorXd& p = values_.at(k);
  const int m = grid_.nodes;
  int base[kMaxDim] = {0, 0};
  double frac[kMaxDim] = {0.0, 0.0};
  for (int d = 0; d < grid_.dim; ++d) {
    const double s = (x(d) - grid_.lo(d)) / grid_.spacing(d) - 0.5;
    if (!(s > -1.0 && s < m)) return 0.0;  // beyond the ghost layer, also catches NaN
    const double f = std::floor(s);
    base[d] = static_cast<int>(f);
    frac[d] = s - f;
  }
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= m || j < 0 || j >= m) return 0.0;
    return p(static_cast<Eigen::Index>(i) * m + j);
  };
  if (grid_.dim == 1) {
    const int i = base[0];
    const double v0 = (i >= 0) ? p(i) : 0.0;
    const double v1 = (i + 1 < m) ? p(i + 1) : 0.0;
    return (1.0 - frac[0]) * v0 + frac[0] * v1;
  }
  const int i = base[0];
  const int j = base[1];
  const double fx = frac[0];
  const double fy = frac[1];
  return (1.0 - fx) * ((1.0 - fy) * at(i, j) + fy * at(i, j + 1)) + fx * ((1.0 - fy) * at(i + 1, j) + fy * at(i + 1, j + 1));
}

void DensityField::bracket(double t, std::size_t& lower, std::size_t& upper, double& weight) const {
  if (times_.empty()) throw Error(ErrorKind::input, "levy_fpe", "density field has no slices");
  const double tol = 1e-12 * std::max(1.0, std::fabs(times_.back()));
  if (t < times_.front() - tol || t > times_.back() + tol) {
    std::ostringstream os;
    os << "time " << t << " outside the density time range [" << times_.front() << ", " << times_.back() << "]";
    throw Error(ErrorKind::input, "levy_fpe", os.str());
  }
  if (t <= times_.front()) {
    lower = upper = 0;
    weight = 0.0;
    return;
  }
  if (t >= times_.back()) {
    lower = upper = times_.size() - 1;
    weight = 0.0;
    return;
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  upper = static_cast<std::size_t>(it - times_.begin());
  lower = upper - 1;
  weight = (t - times_[lower]) / (times_[upper] - times_[lower]);
}

double DensityField::value(const Vec& x, double t) const {
  std::size_t lo = 0, hi = 0;
  double w = 0.0;
  bracket(t, lo, hi, w);
  if (w == 0.0) return value(x, lo);
  return (1.0 - w) * value(x, lo) + w * value(x, hi);
}

std::size_t DensityField::slice_at(double t) const {
  for (std::size_t k = 0; k < times_.size(); ++k)
    if (std::fabs(times_[k] - t) <= 1e-9 * std::max(std::fabs(t), 1e-300)) return k;
  throw Error(ErrorKind::input, "levy_fpe", "no stored slice at t=" + std::to_string(t));
}

Vec DensityField::score(const Vec& x, std::size_t k) const {
  Vec g(grid_.dim);
  const double p = value(x, k);
  for (int d = 0; d < grid_.dim; ++d) {
    const double h = grid_.spacing(d);
    Vec xp = x, xm = x;
    xp(d) += h;
    xm(d) -= h;
    g(d) = (value(xp, k) - value(xm, k)) / (2.0 * h) / p;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

namespace {

double bernoulli(double x) {
  if (std::fabs(x) < 1e-10) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

/// Scharfetter–Gummel face coefficients: flux = A p_left - B p_right.
void sg_coefficients(double b, double D, double h, double& A, double& B) {
  if (D <= 0.0) {
    A = std::max(b, 0.0);
    B = std::max(-b, 0.0);
    return;
  }
  const double pe = b * h / D;
  A = D / h * bernoulli(-pe);
  B = D / h * bernoulli(pe);
}

/// Pre-factored tridiagonal system for one grid line (Thomas algorithm).
struct LineSystem {
  std::vector<double> sub;    // sub[i] multiplies p_{i-1}
  std::vector<double> inv;    // 1 / modified diagonal
  std::vector<double> cprime; // modified super-diagonal

  void factor(const std::vector<double>& a, const std::vector<double>& diag, const std::vector<double>& c) {
    const std::size_t n = diag.size();
    sub = a;
    inv.resize(n);
    cprime.resize(n);
    double denom = diag[0];
    inv[0] = 1.0 / denom;
    cprime[0] = c[0] * inv[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom = diag[i] - a[i] * cprime[i - 1];
      inv[i] = 1.0 / denom;
      cprime[i] = c[i] * inv[i];
    }
  }

  template <class Access>
  void solve(Access&& x, std::size_t n) const {
    x(0) = x(0) * inv[0];
    for (std::size_t i = 1; i < n; ++i) x(i) = (x(i) - sub[i] * x(i - 1)) * inv[i];
    for (std::size_t i = n - 1; i-- > 0;) x(i) -= cprime[i] * x(i + 1);
  }
};

class DriftDiffusionStep {
 public:
  DriftDiffusionStep(const FiniteActivityModel& model, const SpatialGrid& grid, double dt) : grid_(grid) {
    const int m = grid.nodes;
    const double D = 0.5 * model.sigma() * model.sigma();
    const std::size_t lines = grid.dim == 1 ? 1 : static_cast<std::size_t>(m);
    for (int dir = 0; dir < grid.dim; ++dir) {
      const double h = grid.spacing(dir);
      std::vector<LineSystem> systems(lines);
      for (std::size_t line = 0; line < lines; ++line) {
        std::vector<double> A(static_cast<std::size_t>(m) + 1), B(static_cast<std::size_t>(m) + 1);
        for (int f = 0; f <= m; ++f) {
          Vec x(grid.dim);
          x(dir) = grid.lo(dir) + f * h;
          if (grid.dim == 2) {
            const int other = 1 - dir;
            x(other) = grid.lo(other) + (static_cast<double>(line) + 0.5) * grid.spacing(other);
          }
          const double b = model.drift(x)(dir);
          if (!std::isfinite(b)) throw Error(ErrorKind::numerical, "levy_fpe", "drift is not finite on the grid");
          sg_coefficients(b, D, h, A[static_cast<std::size_t>(f)], B[static_cast<std::size_t>(f)]);
        }
        std::vector<double> sub(static_cast<std::size_t>(m)), diag(static_cast<std::size_t>(m)),
            sup(static_cast<std::size_t>(m));
        const double r = dt / h;
        for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) {
          sub[i] = -r * A[i];
          diag[i] = 1.0 + r * (A[i + 1] + B[i]);
          sup[i] = -r * B[i + 1];
        }
        systems[line].factor(sub, diag, sup);
      }
      systems_.push_back(std::move(systems));
    }
  }

  void apply(Eigen::VectorXd& p, int threads) const {
    const auto m = static_cast<std::size_t>(grid_.nodes);
    if (grid_.dim == 1) {
      systems_[0][0].solve([&](std::size_t i) -> double& { return p(static_cast<Eigen::Index>(i)); }, m);
      return;
    }
    // x1 direction: line = fixed j, stride m.
    parallel_for(m, threads, [&](std::size_t j) {
      systems_[0][j].solve([&](std::size_t i) -> double& { return p(static_cast<Eigen::Index>(i * m + j)); }, m);
    });
    parallel_for(m, threads, [&](std::size_t i) {
      systems_[1][i].solve([&](std::size_t j) -> double& { return p(static_cast<Eigen::Index>(i * m + j)); }, m);
    });
  }

 private:
  const SpatialGrid& grid_;
  std::vector<std::vector<LineSystem>> systems_;  // [direction][line]
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Linear convolution with the sampled jump kernel K[k] = ν_J(k h) h^d, |k| ≤ r.
class KernelConvolution {
 public:
  KernelConvolution(const JumpSizeDensity& jump, const SpatialGrid& grid) : dim_(grid.dim), m_(grid.nodes) {
    for (int d = 0; d < dim_; ++d) r_ = std::max(r_, static_cast<int>(std::ceil(jump.radius() / grid.spacing(d))));
    n_ = next_pow2(static_cast<std::size_t>(m_ + 2 * r_ + 1));
    const double vol = grid.cell_volume();
    const std::size_t total = dim_ == 1 ? n_ : n_ * n_;
    std::vector<std::complex<double>> kernel(total, 0.0);
    const int w = 2 * r_ + 1;
    kappa_ = 0.0;
    for (int a = 0; a < (dim_ == 1 ? 1 : w); ++a) {
      for (int b = 0; b < w; ++b) {
        Vec z(dim_);
        if (dim_ == 1) {
          z(0) = (b - r_) * grid.spacing(0);
        } else {
          z(0) = (a - r_) * grid.spacing(0);
          z(1) = (b - r_) * grid.spacing(1);
        }
        const double v = jump(z) * vol;
        kappa_ += v;
        kernel[dim_ == 1 ? static_cast<std::size_t>(b) : static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)] = v;
      }
    }
    spectrum_ = transform(kernel, false);
  }

  double kappa() const noexcept { return kappa_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& q) const {
    const std::size_t total = dim_ == 1 ? n_ : n_ * n_;
    const auto m = static_cast<std::size_t>(m_);
    std::vector<std::complex<double>> buf(total, 0.0);
    if (dim_ == 1) {
      for (std::size_t i = 0; i < m; ++i) buf[i] = q(static_cast<Eigen::Index>(i));
    } else {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) buf[i * n_ + j] = q(static_cast<Eigen::Index>(i * m + j));
    }
    buf = transform(buf, false);
    for (std::size_t k = 0; k < total; ++k) buf[k] *= spectrum_[k];
    buf = transform(buf, true);
    Eigen::VectorXd out(q.size());
    const auto r = static_cast<std::size_t>(r_);
    if (dim_ == 1) {
      for (std::size_t i = 0; i < m; ++i) out(static_cast<Eigen::Index>(i)) = buf[i + r].real();
    } else {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) out(static_cast<Eigen::Index>(i * m + j)) = buf[(i + r) * n_ + j + r].real();
    }
    return out;
  }

 private:
  std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& in, bool inverse) const {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> out;
    if (dim_ == 1) {
      if (inverse)
        fft.inv(out, in);
      else
        fft.fwd(out, in);
      return out;
    }
    out = in;
    std::vector<std::complex<double>> line(n_), res;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = 0; b < n_; ++b) line[b] = pass == 0 ? out[a * n_ + b] : out[b * n_ + a];
        if (inverse)
          fft.inv(res, line);
        else
          fft.fwd(res, line);
        for (std::size_t b = 0; b < n_; ++b) (pass == 0 ? out[a * n_ + b] : out[b * n_ + a]) = res[b];
      }
    }
    return out;
  }

  int dim_;
  int m_;
  int r_ = 0;
  std::size_t n_ = 0;
  double kappa_ = 0.0;
  std::vector<std::complex<double>> spectrum_;
};

/// Gain by Gauss–Legendre over the support with multilinear interpolation of λp.
class QuadratureGain {
 public:
  QuadratureGain(const JumpSizeDensity& jump, const SpatialGrid& grid, int nodes)
      : rule_(support_rule(jump, nodes)), grid_(grid) {
    kappa_ = 0.0;
    for (std::size_t q = 0; q < rule_.size(); ++q) kappa_ += rule_.weights[q] * rule_.density[q];
  }

  double kappa() const noexcept { return kappa_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& q, int threads) const {
    DensityField field(grid_, Vec::Zero(grid_.dim), 1.0);
    field.push_slice(0.0, q, 0.0);
    Eigen::VectorXd out(q.size());
    parallel_for(grid_.size(), threads, [&](std::size_t i) {
      const Vec x = grid_.node(i);
      double s = 0.0;
      for (std::size_t k = 0; k < rule_.size(); ++k)
        s += rule_.weights[k] * rule_.density[k] * field.value(Vec(x - rule_.nodes[k]), std::size_t{0});
      out(static_cast<Eigen::Index>(i)) = s;
    });
    return out;
  }

 private:
  SupportRule rule_;
  const SpatialGrid& grid_;
  double kappa_ = 0.0;
};

void check_grid(const FiniteActivityModel& model, const SpatialGrid& grid) {
  if (grid.dim != model.dim() || grid.lo.size() != grid.dim || grid.hi.size() != grid.dim)
    throw Error(ErrorKind::input, "levy_fpe", "grid dimension does not match the model");
  if (grid.nodes < 3 || (grid.hi.array() <= grid.lo.array()).any())
    throw Error(ErrorKind::input, "levy_fpe", "grid is degenerate");
}

}  // namespace

DensityField solve_levy_fpe(const FiniteActivityModel& model, const Vec& x0, double epsilon, const SpatialGrid& grid,
                            const FpeOptions& options) {
  check_grid(model, grid);
  if (x0.size() != model.dim()) throw Error(ErrorKind::input, "levy_fpe", "x0 has the wrong dimension");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::input, "levy_fpe", "epsilon must be positive");
  if (!(options.T > 0.0) || options.steps < 1 || options.store_every < 1)
    throw Error(ErrorKind::input, "levy_fpe", "need T > 0, steps >= 1 and store_every >= 1");
  const double width = (grid.hi - grid.lo).minCoeff();
  if (model.jump().radius() > 0.25 * width) {
    std::ostringstream os;
    os << "jump support radius " << model.jump().radius() << " exceeds a quarter of the box width " << width;
    throw Error(ErrorKind::validation, "levy_fpe", os.str());
  }
  for (int k = 0; k < grid.dim; ++k) {
    if (grid.spacing(k) > 0.5 * std::sqrt(epsilon)) {
      std::ostringstream os;
      os << "grid spacing " << grid.spacing(k) << " does not resolve epsilon (need h <= sqrt(eps)/2 = "
         << 0.5 * std::sqrt(epsilon) << ")";
      throw Error(ErrorKind::validation, "levy_fpe", os.str());
    }
  }
  if (!grid.contains(x0)) throw Error(ErrorKind::input, "levy_fpe", "x0 lies outside the grid box");

  const std::size_t n = grid.size();
  const double vol = grid.cell_volume();
  const double dt = options.T / static_cast<double>(options.steps);

  Eigen::VectorXd lambda(static_cast<Eigen::Index>(n));
  Eigen::VectorXd p(static_cast<Eigen::Index>(n));
  const double norm = std::pow(2.0 * std::numbers::pi * epsilon, -0.5 * grid.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec x = grid.node(i);
    const double lam = model.rate(x);
    if (!(lam >= 0.0) || !std::isfinite(lam)) {
      std::ostringstream os;
      os << "rate " << lam << " is negative or not finite at grid node x=(" << x.transpose() << ")";
      throw Error(ErrorKind::validation, "levy_fpe", os.str());
    }
    lambda(static_cast<Eigen::Index>(i)) = lam;
    p(static_cast<Eigen::Index>(i)) = norm * std::exp(-(x - x0).squaredNorm() / (2.0 * epsilon));
  }

  const bool jumps_on = lambda.maxCoeff() > 0.0;
  std::optional<KernelConvolution> convolution;
  std::optional<QuadratureGain> quadrature;
  double kappa = 0.0;
  if (jumps_on) {
    if (options.jump_scheme == JumpScheme::grid_convolution) {
      convolution.emplace(model.jump(), grid);
      kappa = convolution->kappa();
    } else {
      quadrature.emplace(model.jump(), grid, options.gl_nodes);
      kappa = quadrature->kappa();
    }
    const double cfl = dt * kappa * lambda.maxCoeff();
    if (cfl > 1.0) {
      std::ostringstream os;
      os << "CFL violation in the jump step: dt*kappa*lambda_max = " << cfl << " > 1; use dt <= "
         << 1.0 / (kappa * lambda.maxCoeff());
      throw Error(ErrorKind::numerical, "levy_fpe", os.str());
    }
  }

  const DriftDiffusionStep drift_diffusion(model, grid, dt);
  DensityField field(grid, x0, epsilon);
  field.push_slice(0.0, p, 0.0);

  double clipped_total = 0.0;
  for (std::size_t step = 1; step <= options.steps; ++step) {
    drift_diffusion.apply(p, options.threads);
    if (jumps_on) {
      const Eigen::VectorXd q = lambda.cwiseProduct(p);
      const Eigen::VectorXd gain = convolution ? convolution->apply(q) : quadrature->apply(q, options.threads);
      p += dt * (gain - kappa * q);
    }
    double clipped = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p(i) < 0.0) {
        clipped -= p(i);
        p(i) = 0.0;
      }
    }
    clipped_total += clipped * vol;

    const double t = step == options.steps ? options.T : static_cast<double>(step) * dt;
    const double audited = p.sum() * vol - clipped_total;
    if (!std::isfinite(audited) || audited < 1.0 - options.tol_mass) {
      std::ostringstream os;
      os << "mass " << audited << " fell below 1 - tol_mass (tol_mass=" << options.tol_mass << ") at t=" << t
         << "; enlarge the box";
      throw Error(ErrorKind::numerical, "levy_fpe", os.str());
    }
    if (step % options.store_every == 0 || step == options.steps) field.push_slice(t, p, clipped_total);
  }
  return field;
}

// ---------------------------------------------------------------------------
// Pointwise jump operators
// ---------------------------------------------------------------------------

double jump_term_gain_loss(const FiniteActivityModel& model, const std::function<double(const Vec&)>& p,
                           const Vec& x, int nodes_per_dim, int panels) {
  const SupportRule rule = support_rule(model.jump(), nodes_per_dim, panels);
  double gain = 0.0;
  double kappa = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * rule.density[q];
    const Vec y = x - rule.nodes[q];
    gain += w * model.rate(y) * p(y);
    kappa += w;
  }
  return gain - kappa * model.rate(x) * p(x);
}

double jump_term_theta_form(const FiniteActivityModel& model, const std::function<double(const Vec&)>& p,
                            const std::function<Vec(const Vec&)>& grad_p, const Vec& x, int nodes_per_dim, int panels,
                            int theta_nodes) {
  const SupportRule rule = support_rule(model.jump(), nodes_per_dim, panels);
  const QuadratureRule theta = gauss_legendre(theta_nodes, 0.0, 1.0);
  double total = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec& z = rule.nodes[q];
    double inner = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const Vec y = x - theta.nodes[k] * z;
      const Vec grad = p(y) * model.rate_gradient(y) + model.rate(y) * grad_p(y);
      inner += theta.weights[k] * z.dot(grad);
    }
    total -= rule.weights[q] * rule.density[q] * inner;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Short-time limit
// ---------------------------------------------------------------------------

double short_time_relative_error(const DensityField& field, const FiniteActivityModel& model, const Vec& x,
                                 std::size_t slice, LimitForm form, double band_lo) {
  const double a = model.jump().radius();
  const double r = (x - field.x0()).norm();
  if (r < band_lo * a) {
    std::ostringstream os;
    os << "|x - x0| = " << r << " is inside the excluded band |x - x0| < " << band_lo * a;
    throw Error(ErrorKind::input, "levy_fpe", os.str());
  }
  const double t = field.times().at(slice);
  if (!(t > 0.0)) throw Error(ErrorKind::input, "levy_fpe", "short-time check needs t > 0");
  const double lam = form == LimitForm::at_source ? model.rate(field.x0()) : model.rate(x);
  const double target = lam * model.jump()(Vec(x - field.x0()));
  if (!(target > 0.0)) throw Error(ErrorKind::input, "levy_fpe", "limit density vanishes at the evaluation point");
  return std::fabs(field.value(x, slice) / t - target) / target;
}

ShortTimeReport short_time_limit_check(const DensityField& field, const FiniteActivityModel& model,
                                       const std::vector<double>& times, LimitForm form, double band_lo,
                                       double band_hi) {
  if (!(band_lo > 0.0) || !(band_hi > band_lo) || band_hi >= 1.0)
    throw Error(ErrorKind::input, "levy_fpe", "evaluation band must satisfy 0 < lo < hi < 1");
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const double a = model.jump().radius();
  const SpatialGrid& grid = field.grid();

  ShortTimeReport report;
  for (double t : sorted) {
    const std::size_t k = field.slice_at(t);
    ShortTimeRow row;
    row.t = t;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec x = grid.node(i);
      const double r = (x - field.x0()).norm();
      if (r < band_lo * a || r > band_hi * a) continue;
      const double err = short_time_relative_error(field, model, x, k, form, band_lo);
      ++row.points;
      if (row.points == 1 || err > row.max_relative_error) {
        row.max_relative_error = err;
        row.witness = x;
      }
    }
    if (row.points == 0) throw Error(ErrorKind::input, "levy_fpe", "no grid nodes inside the evaluation band");
    report.rows.push_back(row);
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].max_relative_error > report.rows[i - 1].max_relative_error)) report.monotone = false;
  }
  if (!report.monotone)
    report.warning = "relative error does not decrease as t decreases; check epsilon, grid spacing and dt";
  return report;
}

double expected_jump_count(const DensityField& field, const FiniteActivityModel& model) {
  const SpatialGrid& grid = field.grid();
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) lambda(static_cast<Eigen::Index>(i)) = model.rate(grid.node(i));
  const double vol = grid.cell_volume();
  double total = 0.0;
  double prev = lambda.dot(field.slice(0)) * vol;
  for (std::size_t k = 1; k < field.slices(); ++k) {
    const double cur = lambda.dot(field.slice(k)) * vol;
    total += 0.5 * (prev + cur) * (field.times()[k] - field.times()[k - 1]);
    prev = cur;
  }
  return total;
}

}  // namespace jumpom
