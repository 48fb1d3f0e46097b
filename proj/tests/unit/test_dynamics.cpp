#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace enstrophy;
using namespace testing_helpers;

namespace {

double relative_l2(const SpectralField& a, const SpectralField& b) {
  const double scale = std::sqrt(l2_norm_squared(a));
  return std::sqrt(l2_norm_squared(a - b)) / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

TEST_CASE("biot-savart of a shear") {
  const VelocityField u = biot_savart(cos_mode({1, 0}));
  const SpectralField expected = sin_mode({1, 0}, -1.0 / (2 * std::numbers::pi));
  CHECK(max_abs_diff(u.u1, SpectralField(1)) == 0.0);
  CHECK(max_abs_diff(u.u2, expected) < 1e-16);
  validate(u);
  // curl and divergence on the grid
  const auto [d1u2, d2u2] = gradient(u.u2);
  const auto [d1u1, d2u1] = gradient(u.u1);
  const GridField curl_grid = to_grid(d2u1 - d1u2, 8);
  const GridField div_grid = to_grid(d1u1 + d2u2, 8);
  for (int a = 0; a < 8; ++a) {
    CHECK(curl_grid(a, 3) == doctest::Approx(std::cos(2 * std::numbers::pi * a / 8)).epsilon(1e-14));
    CHECK(std::abs(div_grid(a, 3)) < 1e-15);
  }
}

TEST_CASE("biot-savart contract") {
  SpectralField c(0);
  c.set_mean(3.0);
  const VelocityField zero = biot_savart(c);
  CHECK(l2_norm_squared(zero.u1) + l2_norm_squared(zero.u2) == 0.0);

  for (int n : {1, 3, 8}) {
    const SpectralField w = random_field(n, 11);
    const VelocityField u = biot_savart(w);
    validate(u);
    SpectralField mean_free = w;
    mean_free.set_mean(0.0);
    CHECK(max_abs_diff(curl(u), mean_free) <= 1e-12);
    CHECK(max_abs_diff(divergence(u), SpectralField(n)) == 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const ModeIndex m = w.mode(i);
      CHECK(static_cast<double>(m.n1) * u.u1[m] + static_cast<double>(m.n2) * u.u2[m] == Complex{});
    }
  }
}

TEST_CASE("shear fields are steady") {
  for (auto strategy : {DriftStrategy::direct, DriftStrategy::dealiased}) {
    CHECK(l2_norm_squared(drift(cos_mode({1, 0}), 3, strategy)) == 0.0);
    CHECK(l2_norm_squared(drift(cos_mode({2, 1}) + sin_mode({4, 2}, 0.3), 4, strategy)) < 1e-30);
  }
}

TEST_CASE("drift by hand convolution") {
  // w = cos(2 pi x1) + cos(2 pi (x1 + x2)); the only nonzero outputs are
  // b(2,1) = 1/8, b(0,-1) = -1/8 and their mirrors.
  const SpectralField w = cos_mode({1, 0}) + cos_mode({1, 1});
  SpectralField expected(2);
  expected.set_mode({2, 1}, 0.125);
  expected.set_mode({0, 1}, -0.125);
  for (int n : {2, 3, 5}) {
    const SpectralField direct = drift(w, n, DriftStrategy::direct);
    const SpectralField fast = drift(w, n, DriftStrategy::dealiased);
    CHECK(max_abs_diff(direct, expected) < 1e-15);
    CHECK(max_abs_diff(fast, expected) < 1e-15);
  }
  // N = 1 keeps only (0, +-1)
  SpectralField n1(1);
  n1.set_mode({0, 1}, -0.125);
  CHECK(max_abs_diff(drift(w, 1, DriftStrategy::direct), n1) < 1e-15);
}

TEST_CASE("dealiased drift matches the direct sum") {
  for (int n : {1, 2, 4, 8, 16}) {
    CHECK(dealiased_grid_size(n) >= 3 * n + 2);
    CHECK(std::has_single_bit(static_cast<unsigned>(dealiased_grid_size(n))));
    for (std::uint64_t i = 0; i < 5; ++i) {
      const SpectralField w = random_field(n, i, 21);
      CHECK(relative_l2(drift(w, n, DriftStrategy::direct), drift(w, n, DriftStrategy::dealiased)) <= 1e-12);
    }
  }
  // inputs above the cutoff are projected first
  const SpectralField w = random_field(6, 3);
  CHECK(relative_l2(drift(w, 4, DriftStrategy::direct), drift(project(w, 4), 4, DriftStrategy::dealiased)) <= 1e-12);
}

TEST_CASE("drift is orthogonal to the field") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const SpectralField w = random_field(8, i, 31);
    CHECK(std::abs(dual_pairing(drift(w, 8), w)) <= 1e-10 * l2_norm_squared(w));
  }
}

TEST_CASE("quadratic coefficients") {
  SpectralField phi(2);
  phi.set_mode({-2, -1}, 1.0);
  const QuadraticForm form = quadratic_coefficients(phi, 2);
  validate(form);
  CHECK(form.kernel.at({1, 0}, {1, 1}) == Complex{0.25, 0.0});
  CHECK(form.kernel.at({1, 1}, {1, 0}) == Complex{0.25, 0.0});
  CHECK(form.kernel.at({-1, 0}, {-1, -1}) == Complex{0.25, 0.0});

  // cross-check on a two-mode field
  const SpectralField w = cos_mode({1, 0}) + cos_mode({1, 1});
  CHECK(pairing_b_phi(w, form) == doctest::Approx(dual_pairing(drift(w, 2, DriftStrategy::direct), phi)).epsilon(1e-14));

  const QuadraticForm random_form = quadratic_coefficients(random_field(3, 1), 3);
  for (const auto& e : random_form.kernel.entries()) {
    CHECK(e.n.norm2() != e.m.norm2());
    CHECK_FALSE(e.n.is_zero());
    CHECK_FALSE(e.m.is_zero());
  }
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) CHECK(random_form.kernel.at({a, b}, {-a, -b}) == Complex{});
  CHECK(random_form.kernel.trace() == 0.0);

  SpectralField constant(2);
  constant.set_mean(4.0);
  CHECK(quadratic_coefficients(constant, 4).kernel.empty());
  CHECK(pairing_b_phi(random_field(4, 2), quadratic_coefficients(constant, 4)) == 0.0);
}

TEST_CASE("pairing identity") {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int n = 2 + static_cast<int>(i % 4);
    const SpectralField w = random_field(n, i, 41);
    const SpectralField phi = random_field(n, i, 42);
    const QuadraticForm form = quadratic_coefficients(phi, n);
    const double expected = dual_pairing(drift(w, n), phi);
    const double got = pairing_b_phi(w, form);
    CHECK(std::abs(got - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
    CHECK(pairing_b_phi(-w, form) == doctest::Approx(got).epsilon(1e-13));
  }
}

TEST_CASE("quadratic form csv") {
  SpectralField phi(2);
  phi.set_mode({-2, -1}, 1.0);
  std::ostringstream out;
  write_csv(out, quadratic_coefficients(phi, 2));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n1,n2,m1,m2,re,im");
  std::size_t rows = 0;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == quadratic_coefficients(phi, 2).kernel.entries().size());
}

TEST_CASE("elementary kernels") {
  // cos(2 pi x1) cos(2 pi y1): trace 1/2
  const CoefficientKernel rank_one = separable_kernel(cos_mode({1, 0}), cos_mode({1, 0}));
  validate(rank_one);
  CHECK(rank_one.trace() == doctest::Approx(0.5));
  const SpectralField w = random_field(2, 3);
  CHECK(rank_one.pairing(w) == doctest::Approx(std::pow(dual_pairing(w, cos_mode({1, 0})), 2)).epsilon(1e-14));

  // cos(2 pi (x1 - y1)): trace 1, int int f^2 = 1/2, sup = 1
  const CoefficientKernel translation = translation_kernel(cos_mode({1, 0}));
  validate(translation);
  CHECK(translation.trace() == doctest::Approx(1.0));
  CHECK(translation.hilbert_schmidt_squared() == doctest::Approx(0.5));
  CHECK(translation.sup_bound() == doctest::Approx(1.0));
}

TEST_CASE("real-space kernel") {
  const SpectralField phi = cos_mode({1, 1}) + sin_mode({1, 0}, 0.5);
  const KernelEval ke(phi, 32);
  for (Point z : {Point{0.1, 0.2}, Point{-0.3, 0.05}, Point{0.45, -0.4}}) {
    const auto k = ke.velocity_kernel(z);
    const auto km = ke.velocity_kernel({-z.x1, -z.x2});
    CHECK(k[0] == doctest::Approx(-km[0]).epsilon(1e-12));
    CHECK(k[1] == doctest::Approx(-km[1]).epsilon(1e-12));
  }
  const Point x{0.12, 0.7}, y{0.55, 0.31};
  CHECK(hphi_realspace(ke, x, y).value == doctest::Approx(hphi_realspace(ke, y, x).value).epsilon(1e-12));
  CHECK(hphi_realspace(ke, x, y).truncation > 0.0);
  CHECK_THROWS_AS(hphi_realspace(ke, x, x), std::invalid_argument);
  const Point d = torus_difference({0.9, 0.1}, {0.1, 0.9});
  CHECK(d.x1 == doctest::Approx(-0.2));
  CHECK(d.x2 == doctest::Approx(0.2));

  SpectralField constant(1);
  constant.set_mean(1.0);
  const KernelEval flat(constant, 16);
  CHECK(hphi_realspace(flat, x, y).value == 0.0);
  CHECK(trace_integral(flat, 2, 12).value == 0.0);
}

TEST_CASE("symmetry integrals vanish for even kernels") {
  const SymmetricMatrix2 identity{1.0, 0.0, 1.0};
  const SymmetricMatrix2 off{0.0, 1.0, 0.0};
  const SymmetricMatrix2 diag{1.0, 0.0, -1.0};
  CHECK(std::abs(symmetry_integral(dirichlet_kernel(2), identity, 64)) <= 1e-13);
  CHECK(std::abs(symmetry_integral(dirichlet_kernel(4), off, 128)) <= 1e-13);
  CHECK(std::abs(symmetry_integral(dirichlet_kernel(3), diag, 32)) <= 1e-13);

  // a shifted kernel is not even
  SpectralField shifted(2);
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      if (ModeIndex{a, b}.is_canonical())
        shifted.set_mode({a, b}, std::polar(1.0, -2 * std::numbers::pi * (0.13 * a + 0.07 * b)));
  shifted.set_mean(1.0);
  CHECK(std::abs(symmetry_integral(shifted, off, 64)) > 1e-6);
}
