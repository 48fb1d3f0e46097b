#include "enstrophy/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace enstrophy {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate mean_estimate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("mean_estimate: no samples");
  const double mean = pairwise_sum(values) / n;
  if (n == 1) return {mean, 0.0, 1};
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1);
  return {mean, std::sqrt(var / n), n};
}

Estimate variance_estimate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) throw std::invalid_argument("variance_estimate: need at least 4 samples");
  const double mean = pairwise_sum(values) / n;
  std::vector<double> d2(n), d4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double s2 = pairwise_sum(d2) / (n - 1);
  const double m4 = pairwise_sum(d4) / n;
  const double nn = static_cast<double>(n);
  const double var_of_s2 = std::max(0.0, (m4 - s2 * s2 * (nn - 3.0) / (nn - 1.0)) / nn);
  return {s2, std::sqrt(var_of_s2), n};
}

bool within_se(const Estimate& a, const Estimate& b, double k) {
  return std::abs(a.value - b.value) <= k * std::hypot(a.std_error, b.std_error);
}

bool within_se(const Estimate& a, double exact, double k) { return std::abs(a.value - exact) <= k * a.std_error; }

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
  if (lambda < 0.2) return 1.0;
  // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double acc = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    acc += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * acc, 0.0, 1.0);
}

Estimate raw_moment(std::span<const double> values, int k) {
  std::vector<double> powers(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) powers[i] = std::pow(values[i], k);
  return mean_estimate(powers);
}

}  // namespace enstrophy
