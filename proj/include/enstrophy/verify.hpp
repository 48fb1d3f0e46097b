#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "enstrophy/measure.hpp"
#include "json.hpp"

namespace enstrophy {

struct ReportRow {
  std::string quantity;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct Check {
  std::string description;
  bool passed = false;
};

/// Outcome of one battery. Everything except `runtime_seconds` is a pure
/// function of (name, parameters, seed) and is what gets serialized.
struct TestReport {
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<ReportRow> rows;
  std::vector<Check> checks;
  double runtime_seconds = 0.0;

  bool passed() const;
  void add_row(std::string quantity, const Estimate& e);
  void add_exact(std::string quantity, double value);
  bool check(std::string description, bool ok);
};

nlohmann::ordered_json to_json(const TestReport& report);
/// CSV `quantity,estimate,std_error,n_samples`.
void write_csv(std::ostream& out, const TestReport& report);

/// Pairings Q_i = <w_i (x) w_i, A> for samples 0..M-1 of `spec`.
std::vector<double> sample_pairings(const CoefficientKernel& kernel, const MeasureSpec& spec, std::size_t count);

/// MC mean of the pairing against the trace sum_n A(n,-n), 3 SE.
TestReport wick_mean_test(const std::string& label, const CoefficientKernel& kernel, const MeasureSpec& spec,
                          std::size_t count);

/// MC variance against 2 sum |A|^2 within `rel_tol`.
TestReport wick_variance_test(const std::string& label, const CoefficientKernel& kernel, const MeasureSpec& spec,
                              std::size_t count, double rel_tol = 0.05);

/// (2p)! / (2^p p!).
double moment_bound_constant(int p);

/// E|Q|^p + 3 SE <= (2p)!/(2^p p!) sup^p, with sup = sum |A| >= ||f||_inf.
TestReport moment_bound_test(const std::string& label, const CoefficientKernel& kernel, int p,
                             const MeasureSpec& spec, std::size_t count);

using KernelFamily = std::function<CoefficientKernel(int cutoff)>;

/**
 * E exp(eps |Q_N|) with the kernel at each cutoff rescaled to sum |A| = 1.
 * Asserted (finite, no trend beyond 3 SE between consecutive cutoffs) for
 * eps <= asserted_max; reported only above it. Cutoff k uses seed + k.
 */
TestReport exp_integrability_test(const std::string& label, const KernelFamily& family,
                                  const std::vector<double>& eps_list, const std::vector<int>& cutoffs,
                                  const MeasureSpec& base_spec, std::size_t count, double asserted_max = 0.4);

/// Partial sums of sum_p (eps/2)^p (2p)!/(p! p!); term ratios approach 2 eps.
struct SeriesCheck {
  double eps = 0.0;
  double partial_200 = 0.0;
  double partial_400 = 0.0;
  double ratio = 0.0;  ///< term_{400} / term_{399}
  bool converges = false;
};
SeriesCheck exp_series_check(double eps);
TestReport exp_series_test(const std::vector<double>& eps_list);

/// E[(Q_N - Q_N')^2] for consecutive cutoffs on common samples at N_ref,
/// against 2 sum |Delta A|^2 within rel_tol, and strictly decreasing.
TestReport cauchy_study(const SpectralField& phi, const std::vector<int>& cutoffs, const MeasureSpec& spec,
                        std::size_t count, double rel_tol = 0.10);

/// KS of <w_T, phi> against N(0, |phi|^2) under the flow from mu^N samples.
/// With `expect_reject`, the pass condition becomes p < reject_level for
/// every observable (negative control).
TestReport invariance_test(const MeasureSpec& spec, const FlowParams& p, const std::vector<SpectralField>& observables,
                           std::size_t count, bool expect_reject = false, double level = 0.01,
                           double reject_level = 1e-3);

/// Continuity-equation checks for a density: weak-form residual within
/// 3 SE + C dt^2, two-route consistency, entropy vs analytic value and its
/// exact invariance under pushforward.
struct ContinuityOptions {
  double weak_form_constant = 1.0;
  std::size_t fresh_count = 0;  ///< 0 means same as the ensemble size
};
TestReport continuity_test(const MeasureSpec& spec, const DensitySpec& d, const CylinderFunctional& F,
                           const FlowParams& p, std::size_t count, const ContinuityOptions& opts = {});

/// Direct vs dealiased drift on random fields, relative max error <= tol.
TestReport drift_oracle_test(const std::vector<int>& cutoffs, std::size_t fields, std::uint64_t seed,
                             double tol = 1e-12);

/// <b_N(w), w> residuals, finite-difference divergence and the linear
/// negative control.
TestReport exact_identities_test(const std::vector<int>& cutoffs, const std::vector<int>& divergence_cutoffs,
                                 std::size_t fields, std::uint64_t seed);

/// Midpoint enstrophy drift over a trajectory and rk4/midpoint orders.
TestReport conservation_test(const FlowParams& p, std::uint64_t seed, double drift_tol = 1e-9,
                             double rk4_min_order = 3.9, double midpoint_min_order = 1.9);

/// Dirichlet-kernel lemma: symmetries of theta_N and W_N, symmetry integrals
/// for a basis of S, and trace integrals across cutoffs with error bars.
TestReport kernel_lemma_study(const SpectralField& phi, const std::vector<int>& cutoffs, int quadrature_grid,
                              int kmax = 64);

/// Lipschitz fit of the remainder R_phi with the Gaussian-windowed kernel at
/// kmax and 2 kmax; passes when the two constants agree within `rel_tol`.
TestReport remainder_fit_test(const SpectralField& phi, int kmax, std::size_t pairs, std::uint64_t seed,
                              double rel_tol = 0.1);

}  // namespace enstrophy
