#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "enstrophy/parallel.hpp"
#include "enstrophy/rng.hpp"
#include "enstrophy/stats.hpp"

using namespace enstrophy;

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  // compensates where naive accumulation drifts
  std::vector<double> tiny(1 << 20, 0.1);
  CHECK(std::abs(pairwise_sum(tiny) - 104857.6) < 1e-8);
}

TEST_CASE("mean and variance estimates") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Estimate m = mean_estimate(v);
  CHECK(m.value == 2.5);
  CHECK(m.samples == 4);
  // sample sd = sqrt(5/3); se = sd / 2
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(variance_estimate(v).value == doctest::Approx(5.0 / 3.0));
  CHECK(within_se({1.0, 0.1, 10}, 1.29));
  CHECK_FALSE(within_se({1.0, 0.1, 10}, 1.31));
  CHECK(within_se({1.0, 0.3, 10}, {2.0, 0.3, 10}));
  CHECK_FALSE(within_se({1.0, 0.1, 10}, {2.0, 0.1, 10}));
}

TEST_CASE("normal cdf and raw moments") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(3.0, 1.0, 2.0) == doctest::Approx(normal_cdf(1.0)));
  const std::vector<double> v{-1.0, 2.0};
  CHECK(raw_moment(v, 3).value == doctest::Approx(3.5));
}

TEST_CASE("kolmogorov-smirnov") {
  // asymptotic critical values
  const std::size_t n = 100000;
  CHECK(ks_pvalue(1.3581 / std::sqrt(double(n)), n) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(ks_pvalue(1.6276 / std::sqrt(double(n)), n) == doctest::Approx(0.01).epsilon(0.01));
  CHECK(ks_pvalue(0.0, 10) == 1.0);

  std::vector<double> uniform(2000);
  CounterRng rng(99);
  for (auto& u : uniform) u = rng.uniform();
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_pvalue(ks_statistic(uniform, cdf), uniform.size()) > 0.01);
  for (auto& u : uniform) u = u * u;
  CHECK(ks_pvalue(ks_statistic(uniform, cdf), uniform.size()) < 1e-3);
  // single point at the median: D = 1/2
  CHECK(ks_statistic({0.5}, cdf) == doctest::Approx(0.5));
}

TEST_CASE("counter rng is a pure function of key and counter") {
  CounterRng a(stream_key(1, 2)), b(stream_key(1, 2)), c(stream_key(1, 3));
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  std::vector<double> z(100000);
  CounterRng r(5);
  for (auto& x : z) x = r.normal();
  CHECK(within_se(mean_estimate(z), 0.0));
  CHECK(within_se(variance_estimate(z), 1.0));
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
