#include "jumpom/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "jumpom/core.hpp"

namespace jumpom {

namespace {

double ks_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double total = 0.0;
  double prev = std::min(a.front(), b.front());
  while (i < a.size() || j < b.size()) {
    double x;
    if (j == b.size() || (i < a.size() && a[i] <= b[j]))
      x = a[i];
    else
      x = b[j];
    total += std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - prev);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    prev = x;
  }
  return total;
}

void require_samples(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::input, "statistics", "sample sets must be non-empty");
}

}  // namespace

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require_samples(a, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return ks_sorted(a, b);
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  require_samples(a, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return w1_sorted(a, b);
}

double ks_critical_value(std::size_t n, std::size_t m, double c_alpha) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return c_alpha * std::sqrt((dn + dm) / (dn * dm));
}

MarginalComparison compare_marginals(const std::vector<double>& a, const std::vector<double>& b, Metric metric,
                                     std::size_t resamples, std::uint64_t seed, int threads) {
  require_samples(a, b);
  MarginalComparison out;
  out.metric = metric;
  out.n_a = a.size();
  out.n_b = b.size();
  out.resamples = resamples;
  if (a.size() != b.size()) out.warning = "sample sizes differ";
  if (a.size() < 10000 || b.size() < 10000) {
    if (!out.warning.empty()) out.warning += "; ";
    out.warning += "fewer than 1e4 samples in a set";
  }
  auto stat = metric == Metric::ks ? ks_sorted : w1_sorted;
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  out.statistic = stat(sa, sb);
  if (resamples == 0) {
    out.ci_low = out.ci_high = out.statistic;
    return out;
  }

  std::vector<double> boot(resamples);
  parallel_for(resamples, threads, [&](std::size_t r) {
    Engine engine = make_engine(seed, r, channel::bootstrap);
    std::uniform_int_distribution<std::size_t> pick_a(0, sa.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, sb.size() - 1);
    std::vector<double> ra(sa.size()), rb(sb.size());
    for (auto& v : ra) v = sa[pick_a(engine)];
    for (auto& v : rb) v = sb[pick_b(engine)];
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    boot[r] = stat(ra, rb);
  });
  std::sort(boot.begin(), boot.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(boot.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, boot.size() - 1);
    return boot[lo] + (pos - static_cast<double>(lo)) * (boot[hi] - boot[lo]);
  };
  out.ci_low = quantile(0.025);
  out.ci_high = quantile(0.975);
  return out;
}

Interval wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double dn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / dn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * dn)) / (1.0 + z2 / dn);
  const double half = z / (1.0 + z2 / dn) * std::sqrt(p * (1.0 - p) / dn + z2 / (4.0 * dn * dn));
  return {hits == 0 ? 0.0 : std::max(0.0, centre - half), hits == n ? 1.0 : std::min(1.0, centre + half)};
}

SampleMoments sample_moments(const std::vector<double>& x) {
  SampleMoments m;
  if (x.empty()) return m;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  m.mean = mean;
  m.variance = x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0;
  m.std_error = std::sqrt(m.variance / static_cast<double>(x.size()));
  return m;
}

}  // namespace jumpom
