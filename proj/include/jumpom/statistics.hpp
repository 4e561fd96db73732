#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jumpom {

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Two-sample 1-Wasserstein distance ∫ |F_a - F_b| dx.
double wasserstein1(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value c(α) √((n+m)/(nm)); c = 1.63 at α = 0.01.
double ks_critical_value(std::size_t n, std::size_t m, double c_alpha = 1.63);

enum class Metric { ks, w1 };

struct MarginalComparison {
  Metric metric = Metric::w1;
  double statistic = 0.0;
  double ci_low = 0.0;   // 95% percentile bootstrap interval
  double ci_high = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t resamples = 0;
  std::string warning;
};

/// Statistic plus a percentile bootstrap CI; each resample redraws both sets.
MarginalComparison compare_marginals(const std::vector<double>& a, const std::vector<double>& b, Metric metric,
                                     std::size_t resamples = 500, std::uint64_t seed = 0, int threads = 0);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion at normal quantile z.
Interval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
};

SampleMoments sample_moments(const std::vector<double>& x);

}  // namespace jumpom
