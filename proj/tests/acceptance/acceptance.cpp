// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance, seed
// and sample size is fixed here.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "enstrophy/cli.hpp"
#include "enstrophy/verify.hpp"

using namespace enstrophy;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

SpectralField trig(ModeIndex n, Complex coefficient) {
  SpectralField f(n.sup_norm());
  f.set_mode(n, coefficient);
  return f;
}

// cos(2 pi n.x) and sin(2 pi n.x)
SpectralField cos_mode(ModeIndex n, double amp = 1.0) { return trig(n, {0.5 * amp, 0.0}); }
SpectralField sin_mode(ModeIndex n, double amp = 1.0) { return trig(n, {0.0, -0.5 * amp}); }

std::string failures(const TestReport& r) {
  std::string out;
  for (const auto& c : r.checks)
    if (!c.passed) out += "\n      failed: " + c.description;
  return out;
}

std::string row(const TestReport& r, const std::string& quantity) {
  for (const auto& w : r.rows)
    if (w.quantity == quantity) {
      std::ostringstream s;
      s.precision(4);
      s << quantity << "=" << w.estimate;
      if (w.std_error > 0.0) s << "+-" << w.std_error;
      return s.str();
    }
  return quantity + "=?";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome merge(const std::vector<TestReport>& reports, std::string detail) {
  bool pass = true;
  for (const auto& r : reports) {
    pass = pass && r.passed();
    detail += failures(r);
  }
  return {pass, detail};
}

// 1. Direct and dealiased drift agree.
Outcome drift_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const TestReport r = drift_oracle_test({2, 4, 8, 16}, 50, 101, 1e-12);
  const double runtime = seconds_since(start);
  const bool fast = runtime < 60.0;
  std::ostringstream d;
  d << "50 fields per N in {2,4,8,16}, relative tol 1e-12, runtime " << runtime << " s (limit 60)";
  Outcome o = merge({r}, d.str());
  o.pass = o.pass && fast;
  return o;
}

// 2. Orthogonality, divergence-free drift and the linear control.
Outcome exact_identities() {
  const TestReport r = exact_identities_test({2, 4, 8, 16}, {1, 2, 3, 4}, 100, 202);
  return merge({r}, "100 fields, ortho <= 1e-10 |w|^2, scaled divergence <= 1e-5 at h = 1e-4, linear control (2N+1)^2");
}

// 3. curl(biot_savart(w)) = w off the zero mode; n.u(n) = 0 exactly.
Outcome biot_savart_contract() {
  double worst_curl = 0.0;
  double worst_dot = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const SpectralField w = sample_mu_n({n, true, 303}, i);
      const VelocityField u = biot_savart(w);
      const SpectralField back = curl(u);
      for (std::size_t k = 0; k < w.size(); ++k) {
        const ModeIndex m = w.mode(k);
        if (m.is_zero()) {
          worst_curl = std::max(worst_curl, std::abs(back.coefficients()[k]));
          continue;
        }
        worst_curl = std::max(worst_curl, std::abs(back.coefficients()[k] - w.coefficients()[k]));
        const Complex dot = static_cast<double>(m.n1) * u.u1[m] + static_cast<double>(m.n2) * u.u2[m];
        worst_dot = std::max(worst_dot, std::abs(dot));
      }
    }
  }
  std::ostringstream d;
  d << "max |curl u - w| = " << worst_curl << " (tol 1e-12), max |n.u(n)| = " << worst_dot << " (must be 0)";
  return {worst_curl <= 1e-12 && worst_dot == 0.0, d.str()};
}

// 4. Midpoint conserves enstrophy; observed orders.
Outcome conservation() {
  FlowParams p;
  p.cutoff = 8;
  p.dt = 1e-2;
  p.horizon = 1.0;
  p.integrator = Integrator::implicit_midpoint;
  const TestReport r = conservation_test(p, 404, 1e-9, 3.9, 1.9);
  return merge({r}, "N=8, T=1, dt=1e-2: " + row(r, "midpoint_max_relative_enstrophy_drift") + ", " + row(r, "rk4_observed_order") + ", " +
                        row(r, "midpoint_observed_order"));
}

// 5. Wick mean, variance and moment bounds.
Outcome wick() {
  const std::size_t M = 100000;
  const MeasureSpec spec{8, true, 505};
  const SpectralField phi = cos_mode({1, 0}) + sin_mode({1, 1}, 0.5);
  const CoefficientKernel drift_kernel = quadratic_coefficients(phi, 8).kernel;
  SpectralField profile = cos_mode({1, 0});
  profile.set_mean(0.5);
  const CoefficientKernel translation = translation_kernel(profile);
  const CoefficientKernel rank_one = separable_kernel(cos_mode({1, 2}), sin_mode({2, 1}));

  std::vector<TestReport> reports;
  reports.push_back(wick_mean_test("drift", drift_kernel, spec, M));
  reports.push_back(wick_mean_test("translation", translation, {8, true, 506}, M));
  reports.push_back(wick_variance_test("drift", drift_kernel, {8, true, 507}, M, 0.05));
  reports.push_back(wick_variance_test("rank_one", rank_one, {8, true, 508}, M, 0.05));
  for (int p : {2, 3, 4}) reports.push_back(moment_bound_test("drift", drift_kernel, p, {8, true, 509}, M));
  const bool constants = moment_bound_constant(2) == 3.0 && moment_bound_constant(3) == 15.0 &&
                         moment_bound_constant(4) == 105.0;
  Outcome o = merge(reports, "M=1e5 at N=8; mean within 3 SE of the trace, variance within 5%, bounds 3/15/105");
  if (!constants) o.detail += "\n      failed: moment constants differ from 3, 15, 105";
  o.pass = o.pass && constants;
  return o;
}

// 6. Exponential integrability and the series argument.
Outcome exponential() {
  SpectralField c = cos_mode({1, 0});
  const KernelFamily family = [c](int) { return translation_kernel(c); };
  const TestReport mc =
      exp_integrability_test("cos(2 pi (x1 - y1))", family, {0.1, 0.25, 0.4}, {4, 8, 16}, {4, true, 606}, 100000);
  const TestReport series = exp_series_test({0.4, 0.6});
  const SeriesCheck at04 = exp_series_check(0.4);
  const SeriesCheck at06 = exp_series_check(0.6);
  std::ostringstream d;
  d << "M=1e5, N in {4,8,16}, eps in {0.1,0.25,0.4}; series ratio " << at04.ratio << " (eps=0.4), " << at06.ratio
    << " (eps=0.6)";
  Outcome o = merge({mc, series}, d.str());
  o.pass = o.pass && at04.converges && !at06.converges;
  return o;
}

// 7. Cauchy property of the nonlinear pairing.
Outcome cauchy() {
  const auto start = std::chrono::steady_clock::now();
  const SpectralField phi = cos_mode({1, 0}) + sin_mode({1, 1}, 0.5);
  const TestReport r = cauchy_study(phi, {4, 8, 16, 32}, {32, true, 707}, 10000, 0.10);
  const double runtime = seconds_since(start);
  std::ostringstream d;
  d << "M=1e4 common samples, N in {4,8,16} vs 2N, within 10% and strictly decreasing, runtime " << runtime
    << " s (limit 300)";
  Outcome o = merge({r}, d.str());
  o.pass = o.pass && runtime < 300.0;
  return o;
}

// 8. Invariance of the Gaussian measure under the truncated flow.
Outcome invariance() {
  FlowParams p;
  p.cutoff = 8;
  p.dt = 1e-2;
  p.horizon = 1.0;
  p.integrator = Integrator::implicit_midpoint;
  const std::vector<SpectralField> observables{cos_mode({1, 0}), sin_mode({1, 1})};
  const MeasureSpec spec{8, true, 808};
  const TestReport flow = invariance_test(spec, p, observables, 2000, false, 0.01, 1e-3);

  FlowParams forced = p;
  SpectralField forcing(8);
  for (const auto& phi : observables) forcing.axpy(0.5, project(phi, 8));
  forced.forcing = forcing;
  const TestReport control = invariance_test(spec, forced, observables, 2000, true, 0.01, 1e-3);
  return merge({flow, control}, "N=8, T=1, M=2000: " + row(flow, "phi0_ks_pvalue") + ", " +
                                    row(flow, "phi1_ks_pvalue") + "; forced control " +
                                    row(control, "phi0_ks_pvalue") + ", " + row(control, "phi1_ks_pvalue"));
}

// 9. Continuity equation for a tilted density.
Outcome continuity() {
  FlowParams p;
  p.cutoff = 6;
  p.dt = 1e-2;
  p.horizon = 0.5;
  p.integrator = Integrator::implicit_midpoint;
  const SpectralField tilt = cos_mode({0, 1}, 0.5);
  const CylinderFunctional F({cos_mode({1, 0}), sin_mode({1, 1})},
                             {{0, OuterKind::sine, TimeKind::linear_decay, 1.0},
                              {1, OuterKind::tanh, TimeKind::cosine_decay, 0.5}},
                             0.5);
  ContinuityOptions opts;
  opts.weak_form_constant = 1.0;
  opts.fresh_count = 2000;
  const TestReport r = continuity_test({6, true, 909}, DensitySpec::gaussian_tilt(tilt), F, p, 2000, opts);
  return merge({r}, "N=6, T=0.5, M=2000: " + row(r, "weak_form_residual") + ", " + row(r, "entropy_t0") +
                        " vs " + row(r, "entropy_exact"));
}

// 10. Dirichlet-kernel lemma.
Outcome kernel_lemma() {
  const SpectralField phi = cos_mode({1, 0}) + sin_mode({1, 1}, 0.5);
  const TestReport r = kernel_lemma_study(phi, {2, 4, 8}, 36, 64);
  return merge({r}, "symmetries to 1e-13 on a 36^2 symmetric grid, traces across N in {2,4,8}, spectral trace 0");
}

// 11. Byte-identical reports for the same config and seed.
Outcome reproducibility() {
  const fs::path config = fs::path(ENSTROPHY_SOURCE_DIR) / "configs" / "quickcheck.cfg";
  const fs::path root = fs::temp_directory_path() / ("enstrophy_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream log;
  cli::RunOptions a{root / "a", std::nullopt};
  cli::RunOptions b{root / "b", std::nullopt};
  const int code_a = cli::run(config, a, log);
  const char* previous = std::getenv("ENSTROPHY_LAB_WORKERS");
  const std::string saved = previous ? previous : "";
  ::setenv("ENSTROPHY_LAB_WORKERS", "3", 1);
  const int code_b = cli::run(config, b, log);
  if (previous)
    ::setenv("ENSTROPHY_LAB_WORKERS", saved.c_str(), 1);
  else
    ::unsetenv("ENSTROPHY_LAB_WORKERS");

  auto slurp = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t files = 0;
  std::string mismatch;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    if (!fs::exists(root / "b" / rel) || slurp(entry.path()) != slurp(root / "b" / rel)) mismatch += " " + rel.string();
  }
  std::size_t files_b = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "b")) files_b += entry.is_regular_file() ? 1 : 0;
  fs::remove_all(root);

  std::ostringstream d;
  d << files << " files compared (second run with 3 workers), exit codes " << code_a << "/" << code_b;
  if (!mismatch.empty()) d << "\n      failed: differing files:" << mismatch;
  if (files != files_b) d << "\n      failed: file count differs (" << files_b << ")";
  return {files > 0 && mismatch.empty() && files == files_b, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"drift oracle equivalence", drift_oracle},
      {"exact identities", exact_identities},
      {"Biot-Savart contract", biot_savart_contract},
      {"enstrophy conservation and orders", conservation},
      {"Wick mean, variance and moments", wick},
      {"exponential integrability", exponential},
      {"Cauchy convergence", cauchy},
      {"measure invariance", invariance},
      {"continuity equation", continuity},
      {"Dirichlet-kernel lemma", kernel_lemma},
      {"reproducibility", reproducibility},
  };

  // Optional arguments select criteria by number.
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << argv[i] << "\n";
      return 2;
    }
    selected[k - 1] = true;
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(start), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}
