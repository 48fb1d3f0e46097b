#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace enstrophy;
using namespace testing_helpers;

TEST_CASE("mode index basics") {
  const ModeIndex n{3, -5};
  CHECK(n.sup_norm() == 5);
  CHECK(dot(n, n.perp()) == 0);
  CHECK(n.perp() == ModeIndex{-5, -3});
  CHECK(ModeIndex{0, 1}.is_canonical());
  CHECK_FALSE(ModeIndex{0, -1}.is_canonical());
  CHECK_FALSE(ModeIndex{0, 0}.is_canonical());
  CHECK(lattice_size(2) == 25);
}

TEST_CASE("reality is maintained by the writers") {
  SpectralField f(2);
  f.set_mode({1, -2}, {0.3, -0.7});
  CHECK(f[{-1, 2}] == Complex{0.3, 0.7});
  CHECK(f.reality_residual() == 0.0);
  CHECK_THROWS_AS(f.set_mode({0, 0}, {1.0, 0.5}), InvariantViolation);
  CHECK(f[{5, 5}] == Complex{});

  std::vector<Complex> bad(lattice_size(1));
  bad[SpectralField(1).index({1, 0})] = {1.0, 0.0};
  CHECK_THROWS_AS(SpectralField::from_coefficients(1, bad), InvariantViolation);
}

TEST_CASE("cutoff zero fields are constants") {
  SpectralField c(0);
  c.set_mean(2.0);
  CHECK(sobolev_norm(c, 3.0) == doctest::Approx(2.0));
  CHECK(project(c, 3)[{0, 0}] == Complex{2.0, 0.0});
  CHECK(evaluate(c, 0.3, 0.9) == doctest::Approx(2.0));
  CHECK(drift(c, 0) == SpectralField(0));
}

TEST_CASE("project") {
  const SpectralField w = random_field(1, 0);
  const SpectralField up = project(w, 3);
  CHECK(up.cutoff() == 3);
  CHECK(max_abs_diff(up, w) == 0.0);
  CHECK(l2_norm_squared(project(cos_mode({2, 0}), 1)) == 0.0);

  const SpectralField big = random_field(6, 1);
  const SpectralField p = project(big, 3);
  CHECK(l2_norm_squared(p) <= l2_norm_squared(big));
  CHECK(project(p, 3) == p);
  // self-adjoint
  const SpectralField phi = random_field(6, 2);
  CHECK(dual_pairing(p, phi) == doctest::Approx(dual_pairing(big, project(phi, 3))).epsilon(1e-12));
}

TEST_CASE("sobolev norm") {
  SpectralField one(0);
  one.set_mean(1.0);
  for (double s : {-2.0, 0.0, 1.5}) CHECK(sobolev_norm(one, s) == doctest::Approx(1.0));
  SpectralField f(1);
  f.set_mode({1, 0}, 1.0);
  CHECK(sobolev_norm(f, -1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("MC mean of the squared norm of mu^N samples") {
  const int n = 3;
  std::vector<double> values(20000);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::pow(sobolev_norm(random_field(n, i, 9), 0.0), 2);
  CHECK(within_se(mean_estimate(values), (2.0 * n + 1) * (2.0 * n + 1)));
}

TEST_CASE("dirichlet kernel") {
  const SpectralField theta = dirichlet_kernel(1);
  for (auto c : theta.coefficients()) CHECK(c == Complex{1.0, 0.0});
  CHECK(evaluate(theta, 0.0, 0.0) == doctest::Approx(9.0));
  CHECK(dirichlet_kernel_value(1, 0.0, 0.0) == doctest::Approx(9.0));
  for (double x : {0.1, 0.37, 0.8})
    for (double y : {0.05, 0.6}) {
      CHECK(dirichlet_kernel_value(3, x, y) == doctest::Approx(dirichlet_kernel_value(3, y, x)).epsilon(1e-13));
      CHECK(evaluate(dirichlet_kernel(3), x, y) == doctest::Approx(dirichlet_kernel_value(3, x, y)).epsilon(1e-12));
    }
}

TEST_CASE("dirichlet kernel self-convolution by quadrature") {
  // theta * theta by midpoint quadrature at G = 4N + 4, compared coefficientwise.
  const int n = 2;
  const int g = 4 * n + 4;
  GridField conv{g, 0.0, std::vector<double>(static_cast<std::size_t>(g) * g)};
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) {
      double acc = 0.0;
      for (int c = 0; c < g; ++c)
        for (int d = 0; d < g; ++d)
          acc += dirichlet_kernel_value(n, double(c) / g, double(d) / g) *
                 dirichlet_kernel_value(n, double(a - c) / g, double(b - d) / g);
      conv(a, b) = acc / (double(g) * g);
    }
  const SpectralField w = from_grid(conv, n);
  CHECK(max_abs_diff(w, dirichlet_kernel(n)) < 1e-12);
}

TEST_CASE("dual pairing") {
  const SpectralField c = cos_mode({1, 0});
  CHECK(dual_pairing(c, c) == doctest::Approx(0.5).epsilon(1e-15));
  // quadrature oracle for int cos^2
  double q = 0.0;
  const int g = 16;
  for (int a = 0; a < g; ++a) q += std::pow(std::cos(2 * std::numbers::pi * a / g), 2) / g;
  CHECK(q == doctest::Approx(0.5));

  SpectralField one(0);
  one.set_mean(1.0);
  const SpectralField w = random_field(3, 4);
  CHECK(dual_pairing(w, one) == w[{0, 0}].real());
  const SpectralField w2 = random_field(2, 5);
  const SpectralField phi = random_field(3, 6);
  CHECK(dual_pairing(2.5 * w + w2, phi) ==
        doctest::Approx(2.5 * dual_pairing(w, phi) + dual_pairing(w2, phi)).epsilon(1e-12));
  // Parseval
  CHECK(dual_pairing(w, w) == doctest::Approx(std::pow(sobolev_norm(w, 0.0), 2)).epsilon(1e-12));
}

TEST_CASE("grid transforms") {
  CHECK(max_abs_diff(from_grid(to_grid(SpectralField(2), 8), 2), SpectralField(2)) == 0.0);
  const GridField g = to_grid(cos_mode({1, 0}), 8);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) CHECK(g(a, b) == doctest::Approx(std::cos(2 * std::numbers::pi * a / 8)).epsilon(1e-14));

  const SpectralField w = random_field(5, 7);
  CHECK(max_abs_diff(from_grid(to_grid(w, 16), 5), w) <= 1e-12);
  CHECK(max_abs_diff(from_grid(to_grid(w, 11), 5), w) <= 1e-12);
  CHECK_THROWS_AS(from_grid(to_grid(w, 10), 5), std::invalid_argument);
}

TEST_CASE("snapshot csv round trip and validation") {
  const SpectralField w = random_field(3, 8);
  std::stringstream ss;
  write_csv(ss, w);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "n1,n2,re,im");
  CHECK(read_csv(ss) == w);

  std::stringstream broken("n1,n2,re,im\n-1,-1,0,0\n-1,0,0,0\n-1,1,0,0\n0,-1,1,0\n0,0,0,0\n0,1,2,0\n1,-1,0,0\n1,0,0,0\n1,1,0,0\n");
  CHECK_THROWS(read_csv(broken));
}
