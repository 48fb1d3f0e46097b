#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace enstrophy {

/// Sum over a fixed binary tree; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Monte-Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Sample mean and standard error sd / sqrt(n).
Estimate mean_estimate(std::span<const double> values);

/// Unbiased sample variance; the standard error uses the fourth central
/// moment, sqrt((m4 - s^4 (n-3)/(n-1)) / n).
Estimate variance_estimate(std::span<const double> values);

/// |a - b| <= k * sqrt(se_a^2 + se_b^2).
bool within_se(const Estimate& a, const Estimate& b, double k = 3.0);
bool within_se(const Estimate& a, double exact, double k = 3.0);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// Two-sided one-sample Kolmogorov-Smirnov statistic of `values` (any order)
/// against a continuous CDF.
double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf);

/// Asymptotic p-value with the Stephens small-sample correction.
double ks_pvalue(double statistic, std::size_t n);

/// Raw sample moment (1/n) sum x^k, reported with its standard error.
Estimate raw_moment(std::span<const double> values, int k);

}  // namespace enstrophy
