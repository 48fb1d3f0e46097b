#include "enstrophy/verify.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "enstrophy/parallel.hpp"
#include "enstrophy/rng.hpp"

namespace enstrophy {

using nlohmann::ordered_json;

bool TestReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

void TestReport::add_row(std::string quantity, const Estimate& e) {
  rows.push_back({std::move(quantity), e.value, e.std_error, e.samples});
}

void TestReport::add_exact(std::string quantity, double value) { rows.push_back({std::move(quantity), value, 0.0, 0}); }

bool TestReport::check(std::string description, bool ok) {
  checks.push_back({std::move(description), ok});
  return ok;
}

ordered_json to_json(const TestReport& report) {
  ordered_json j;
  j["name"] = report.name;
  j["seed"] = report.seed;
  j["parameters"] = report.parameters;
  j["passed"] = report.passed();
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) checks.push_back({{"description", c.description}, {"passed", c.passed}});
  j["checks"] = std::move(checks);
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"quantity", r.quantity}, {"estimate", r.estimate}, {"std_error", r.std_error},
                    {"n_samples", r.samples}});
  j["rows"] = std::move(rows);
  return j;
}

void write_csv(std::ostream& out, const TestReport& report) {
  out << "quantity,estimate,std_error,n_samples\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& r : report.rows) {
    row.str("");
    row << r.quantity << ',' << r.estimate << ',' << r.std_error << ',' << r.samples << '\n';
    out << row.str();
  }
}

namespace {

TestReport make_report(std::string name, std::uint64_t seed) {
  TestReport r;
  r.name = std::move(name);
  r.seed = seed;
  return r;
}

class Timer {
 public:
  explicit Timer(TestReport& r) : report_(r), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    report_.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  TestReport& report_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

void require_cutoff(const CoefficientKernel& kernel, const MeasureSpec& spec) {
  if (kernel.cutoff() > spec.cutoff)
    throw std::invalid_argument("kernel cutoff " + std::to_string(kernel.cutoff()) + " exceeds sampling cutoff " +
                                std::to_string(spec.cutoff));
}

ordered_json spec_json(const MeasureSpec& spec) {
  return {{"cutoff", spec.cutoff}, {"include_zero_mode", spec.include_zero_mode}, {"seed", spec.seed}};
}

ordered_json flow_json(const FlowParams& p) {
  return {{"cutoff", p.cutoff}, {"dt", p.dt}, {"horizon", p.horizon}, {"integrator", to_string(p.integrator)},
          {"forced", p.forcing.has_value()}};
}

double relative_l2(const SpectralField& a, const SpectralField& b) {
  const double na = std::sqrt(l2_norm_squared(a));
  const double d = std::sqrt(l2_norm_squared(a - b));
  return na > 0.0 ? d / na : d;
}

/// Variance of <w, phi> under mu^N as sampled by `spec`.
double pairing_variance(const SpectralField& phi, const MeasureSpec& spec) {
  double acc = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const ModeIndex n = phi.mode(i);
    if (n.sup_norm() > spec.cutoff || (n.is_zero() && !spec.include_zero_mode)) continue;
    acc += std::norm(phi.coefficients()[i]);
  }
  return acc;
}

}  // namespace

std::vector<double> sample_pairings(const CoefficientKernel& kernel, const MeasureSpec& spec, std::size_t count) {
  require_cutoff(kernel, spec);
  std::vector<double> q(count);
  parallel_for(count, [&](std::size_t i) { q[i] = kernel.pairing(sample_mu_n(spec, i)); });
  return q;
}

TestReport wick_mean_test(const std::string& label, const CoefficientKernel& kernel, const MeasureSpec& spec,
                          std::size_t count) {
  TestReport r = make_report("wick_mean:" + label, spec.seed);
  Timer timer(r);
  r.parameters = {{"measure", spec_json(spec)}, {"samples", count}, {"kernel_entries", kernel.entries().size()}};
  const double trace = kernel.trace();
  const auto q = sample_pairings(kernel, spec, count);
  const Estimate mean = mean_estimate(q);
  r.add_exact("trace", trace);
  r.add_row("mc_mean", mean);
  if (kernel.empty()) {
    r.check("zero kernel: every pairing is exactly 0", mean.value == 0.0 && mean.std_error == 0.0);
  } else {
    r.check("|mean - trace| <= 3 SE (" + fmt(std::abs(mean.value - trace)) + " vs " + fmt(3 * mean.std_error) + ")",
            within_se(mean, trace));
  }
  return r;
}

TestReport wick_variance_test(const std::string& label, const CoefficientKernel& kernel, const MeasureSpec& spec,
                              std::size_t count, double rel_tol) {
  TestReport r = make_report("wick_variance:" + label, spec.seed);
  Timer timer(r);
  r.parameters = {{"measure", spec_json(spec)}, {"samples", count}, {"rel_tol", rel_tol}};
  const double predicted = 2.0 * kernel.hilbert_schmidt_squared();
  const auto q = sample_pairings(kernel, spec, count);
  const Estimate var = variance_estimate(q);
  r.add_exact("predicted_variance", predicted);
  r.add_row("mc_variance", var);
  if (predicted == 0.0) {
    r.check("zero kernel: variance is exactly 0", var.value == 0.0);
  } else {
    const double rel = std::abs(var.value - predicted) / predicted;
    r.add_exact("relative_error", rel);
    r.check("relative error " + fmt(rel) + " <= " + fmt(rel_tol), rel <= rel_tol);
  }
  return r;
}

double moment_bound_constant(int p) {
  // (2p)! / (2^p p!) = (2p-1)!!
  double acc = 1.0;
  for (int k = 2 * p - 1; k > 1; k -= 2) acc *= k;
  return acc;
}

TestReport moment_bound_test(const std::string& label, const CoefficientKernel& kernel, int p,
                             const MeasureSpec& spec, std::size_t count) {
  if (p < 2 || p > 6) throw std::invalid_argument("moment_bound_test: order must be in [2, 6]");
  TestReport r = make_report("moment_bound:" + label + ":p" + std::to_string(p), spec.seed);
  Timer timer(r);
  r.parameters = {{"measure", spec_json(spec)}, {"samples", count}, {"order", p}};
  const double sup = kernel.sup_bound();
  const double bound = moment_bound_constant(p) * std::pow(sup, p);
  auto q = sample_pairings(kernel, spec, count);
  for (auto& v : q) v = std::pow(std::abs(v), p);
  const Estimate m = mean_estimate(q);
  r.add_exact("sup_bound", sup);
  r.add_exact("moment_bound", bound);
  r.add_row("mc_abs_moment", m);
  r.check("E|Q|^p + 3 SE = " + fmt(m.value + 3 * m.std_error) + " <= " + fmt(bound),
          m.value + 3.0 * m.std_error <= bound);
  return r;
}

TestReport exp_integrability_test(const std::string& label, const KernelFamily& family,
                                  const std::vector<double>& eps_list, const std::vector<int>& cutoffs,
                                  const MeasureSpec& base_spec, std::size_t count, double asserted_max) {
  TestReport r = make_report("exp_integrability:" + label, base_spec.seed);
  Timer timer(r);
  r.parameters = {{"eps", eps_list},
                  {"cutoffs", cutoffs},
                  {"samples", count},
                  {"asserted_max_eps", asserted_max},
                  {"include_zero_mode", base_spec.include_zero_mode}};

  std::vector<std::vector<double>> abs_q(cutoffs.size());
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    const int n = cutoffs[k];
    CoefficientKernel kernel = family(n);
    const double sup = kernel.sup_bound();
    if (sup > 0.0) kernel = kernel.scaled(1.0 / sup);
    MeasureSpec spec = base_spec;
    spec.cutoff = n;
    spec.seed = base_spec.seed + k;
    abs_q[k] = sample_pairings(kernel, spec, count);
    for (auto& v : abs_q[k]) v = std::abs(v);
    r.add_exact("sup_bound_N" + std::to_string(n), sup);
  }

  for (double eps : eps_list) {
    std::vector<Estimate> est;
    for (std::size_t k = 0; k < cutoffs.size(); ++k) {
      std::vector<double> e(count);
      for (std::size_t i = 0; i < count; ++i) e[i] = std::exp(eps * abs_q[k][i]);
      est.push_back(mean_estimate(e));
      r.add_row("E_exp_eps" + fmt(eps) + "_N" + std::to_string(cutoffs[k]), est.back());
    }
    if (eps > asserted_max) continue;
    bool finite = true;
    for (const auto& e : est) finite = finite && std::isfinite(e.value) && std::isfinite(e.std_error);
    r.check("eps " + fmt(eps) + ": estimates finite", finite);
    for (std::size_t k = 1; k < est.size(); ++k)
      r.check("eps " + fmt(eps) + ": N " + std::to_string(cutoffs[k - 1]) + " -> " + std::to_string(cutoffs[k]) +
                  " within combined 3 SE",
              within_se(est[k - 1], est[k]));
  }
  return r;
}

SeriesCheck exp_series_check(double eps) {
  auto log_term = [eps](int p) {
    return p * std::log(eps / 2.0) + std::lgamma(2.0 * p + 1.0) - 2.0 * std::lgamma(p + 1.0);
  };
  SeriesCheck s;
  s.eps = eps;
  double acc = 0.0;
  for (int p = 0; p <= 400; ++p) {
    acc += std::exp(log_term(p));
    if (p == 200) s.partial_200 = acc;
  }
  s.partial_400 = acc;
  s.ratio = std::exp(log_term(400) - log_term(399));
  s.converges = std::isfinite(acc) && std::abs(s.partial_400 - s.partial_200) <= 1e-12 * s.partial_400;
  return s;
}

TestReport exp_series_test(const std::vector<double>& eps_list) {
  TestReport r = make_report("exp_series", 0);
  Timer timer(r);
  r.parameters = {{"eps", eps_list}, {"terms", 400}};
  for (double eps : eps_list) {
    const SeriesCheck s = exp_series_check(eps);
    r.add_exact("partial_200_eps" + fmt(eps), s.partial_200);
    r.add_exact("partial_400_eps" + fmt(eps), s.partial_400);
    r.add_exact("term_ratio_eps" + fmt(eps), s.ratio);
    r.check("eps " + fmt(eps) + ": term ratio " + fmt(s.ratio) + " within 1e-2 of 2 eps",
            std::abs(s.ratio - 2.0 * eps) <= 1e-2);
    const bool expect = 2.0 * eps < 1.0;
    r.check("eps " + fmt(eps) + (expect ? ": partial sums converge" : ": partial sums diverge"),
            s.converges == expect && (expect || s.partial_400 > 1e6 * s.partial_200));
  }
  return r;
}

TestReport cauchy_study(const SpectralField& phi, const std::vector<int>& cutoffs, const MeasureSpec& spec,
                        std::size_t count, double rel_tol) {
  if (cutoffs.size() < 2) throw std::invalid_argument("cauchy_study: need at least two cutoffs");
  for (std::size_t k = 1; k < cutoffs.size(); ++k)
    if (cutoffs[k] <= cutoffs[k - 1]) throw std::invalid_argument("cauchy_study: cutoffs must be ascending");
  if (cutoffs.back() > spec.cutoff) throw std::invalid_argument("cauchy_study: sampling cutoff below largest N");
  TestReport r = make_report("cauchy", spec.seed);
  Timer timer(r);
  r.parameters = {{"measure", spec_json(spec)}, {"cutoffs", cutoffs}, {"samples", count}, {"rel_tol", rel_tol}};

  const CoefficientKernel full = quadratic_coefficients(phi, cutoffs.back()).kernel;
  std::vector<CoefficientKernel> kernels;
  for (int n : cutoffs) kernels.push_back(full.restricted(n));

  std::vector<std::vector<double>> q(cutoffs.size(), std::vector<double>(count));
  parallel_for(count, [&](std::size_t i) {
    const SpectralField w = sample_mu_n(spec, i);
    for (std::size_t k = 0; k < kernels.size(); ++k) q[k][i] = kernels[k].pairing(w);
  });

  {
    // Q_N built directly at N against the restriction of the largest form.
    const CoefficientKernel direct = quadratic_coefficients(phi, cutoffs.front()).kernel;
    bool zero = true;
    for (std::size_t i = 0; i < std::min<std::size_t>(count, 100); ++i)
      zero = zero && direct.pairing(sample_mu_n(spec, i)) - q[0][i] == 0.0;
    r.check("N = N': difference exactly 0", zero);
  }

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < cutoffs.size(); ++k) {
    const std::string tag = std::to_string(cutoffs[k]) + "_" + std::to_string(cutoffs[k + 1]);
    const double predicted = 2.0 * kernels[k + 1].outside(cutoffs[k]).hilbert_schmidt_squared();
    std::vector<double> sq(count), ab(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double d = q[k + 1][i] - q[k][i];
      sq[i] = d * d;
      ab[i] = std::abs(d);
    }
    const Estimate msq = mean_estimate(sq);
    r.add_exact("predicted_msq_" + tag, predicted);
    r.add_row("mc_msq_" + tag, msq);
    r.add_row("mc_l1_" + tag, mean_estimate(ab));
    const double rel = std::abs(msq.value - predicted) / predicted;
    r.check("N " + tag + ": relative error " + fmt(rel) + " <= " + fmt(rel_tol), rel <= rel_tol);
    r.check("N " + tag + ": mean square below the previous pair", msq.value < previous);
    previous = msq.value;
  }
  return r;
}

TestReport invariance_test(const MeasureSpec& spec, const FlowParams& p, const std::vector<SpectralField>& observables,
                           std::size_t count, bool expect_reject, double level, double reject_level) {
  TestReport r = make_report(expect_reject ? "invariance_negative_control" : "invariance", spec.seed);
  Timer timer(r);
  r.parameters = {{"measure", spec_json(spec)},
                  {"flow", flow_json(p)},
                  {"samples", count},
                  {"level", level},
                  {"reject_level", reject_level}};
  const Ensemble e0 = init_ensemble(spec, DensitySpec::uniform(), count);
  const Ensemble eT = p.horizon > 0.0 ? pushforward(e0, p) : e0;

  for (std::size_t k = 0; k < observables.size(); ++k) {
    const SpectralField& phi = observables[k];
    const double sd = std::sqrt(pairing_variance(phi, spec));
    std::vector<double> before(count), after(count);
    for (std::size_t i = 0; i < count; ++i) {
      before[i] = dual_pairing(e0.members[i].field, phi);
      after[i] = dual_pairing(eT.members[i].field, phi);
    }
    const std::string tag = "phi" + std::to_string(k);
    for (int m = 1; m <= 4; ++m) {
      r.add_row(tag + "_moment" + std::to_string(m) + "_t0", raw_moment(before, m));
      r.add_row(tag + "_moment" + std::to_string(m) + "_tT", raw_moment(after, m));
    }
    const double d = ks_statistic(after, [sd](double x) { return normal_cdf(x, 0.0, sd); });
    const double pv = ks_pvalue(d, count);
    r.add_exact(tag + "_ks_statistic", d);
    r.add_exact(tag + "_ks_pvalue", pv);
    if (expect_reject)
      r.check(tag + ": KS p-value " + fmt(pv) + " < " + fmt(reject_level), pv < reject_level);
    else
      r.check(tag + ": KS p-value " + fmt(pv) + " > " + fmt(level), pv > level);
  }
  return r;
}

TestReport continuity_test(const MeasureSpec& spec, const DensitySpec& d, const CylinderFunctional& F,
                           const FlowParams& p, std::size_t count, const ContinuityOptions& opts) {
  TestReport r = make_report("continuity", spec.seed);
  Timer timer(r);
  const std::size_t fresh = opts.fresh_count == 0 ? count : opts.fresh_count;
  r.parameters = {{"measure", spec_json(spec)},
                  {"flow", flow_json(p)},
                  {"samples", count},
                  {"fresh_samples", fresh},
                  {"weak_form_constant", opts.weak_form_constant}};

  const Ensemble e0 = init_ensemble(spec, d, count);
  const Estimate residual = weak_form_residual(e0, F, p);
  const double allowance = 3.0 * residual.std_error + opts.weak_form_constant * p.dt * p.dt;
  r.add_row("weak_form_residual", residual);
  r.check("|weak-form residual| " + fmt(std::abs(residual.value)) + " <= 3 SE + C dt^2 = " + fmt(allowance),
          std::abs(residual.value) <= allowance);

  const Ensemble eT = pushforward(e0, p);
  bool weights_same = true;
  for (std::size_t i = 0; i < count; ++i)
    weights_same = weights_same && e0.members[i].weight == eT.members[i].weight;
  r.check("weights bitwise unchanged by pushforward", weights_same);

  const Estimate h0 = entropy(e0);
  const Estimate hT = entropy(eT);
  r.add_row("entropy_t0", h0);
  r.add_row("entropy_tT", hT);
  r.check("entropy bitwise invariant along the flow", h0.value == hT.value && h0.std_error == hT.std_error);
  if (const auto exact = analytic_entropy(d)) {
    r.add_exact("entropy_exact", *exact);
    r.check("entropy within 3 SE of the analytic value", within_se(h0, *exact));
  }

  MeasureSpec fresh_spec = spec;
  fresh_spec.seed = mix64(spec.seed ^ 0x5bd1e995u);
  auto observable = [&F](const SpectralField& w) { return F.value(0.0, F.coordinates(w)); };
  const TwoRouteResult two = two_route_check(eT, fresh_spec, d, fresh, p, observable);
  r.add_row("two_route_forward", two.forward);
  r.add_row("two_route_backward", two.backward);
  r.check("two routes agree within combined 3 SE", two.consistent);
  return r;
}

TestReport drift_oracle_test(const std::vector<int>& cutoffs, std::size_t fields, std::uint64_t seed, double tol) {
  TestReport r = make_report("drift_oracle", seed);
  Timer timer(r);
  r.parameters = {{"cutoffs", cutoffs}, {"fields", fields}, {"tol", tol}};
  for (int n : cutoffs) {
    const MeasureSpec spec{n, true, seed + static_cast<std::uint64_t>(n)};
    std::vector<double> err(fields);
    parallel_for(fields, [&](std::size_t i) {
      const SpectralField w = sample_mu_n(spec, i);
      err[i] = relative_l2(drift(w, n, DriftStrategy::direct), drift(w, n, DriftStrategy::dealiased));
    });
    double worst = 0.0;
    for (double e : err) worst = std::max(worst, e);
    r.add_exact("max_relative_error_N" + std::to_string(n), worst);
    r.check("N " + std::to_string(n) + ": direct vs dealiased " + fmt(worst) + " <= " + fmt(tol), worst <= tol);
  }
  return r;
}

TestReport exact_identities_test(const std::vector<int>& cutoffs, const std::vector<int>& divergence_cutoffs,
                                 std::size_t fields, std::uint64_t seed) {
  TestReport r = make_report("exact_identities", seed);
  Timer timer(r);
  r.parameters = {{"cutoffs", cutoffs}, {"divergence_cutoffs", divergence_cutoffs}, {"fields", fields},
                  {"fd_step", 1e-4}};
  for (int n : cutoffs) {
    const MeasureSpec spec{n, true, seed + static_cast<std::uint64_t>(n)};
    std::vector<double> res(fields);
    parallel_for(fields, [&](std::size_t i) {
      const SpectralField w = sample_mu_n(spec, i);
      res[i] = std::abs(dual_pairing(drift(w, n), w)) / l2_norm_squared(w);
    });
    double worst = 0.0;
    for (double v : res) worst = std::max(worst, v);
    r.add_exact("max_ortho_residual_N" + std::to_string(n), worst);
    r.check("N " + std::to_string(n) + ": |<b_N(w), w>| / |w|^2 = " + fmt(worst) + " <= 1e-10", worst <= 1e-10);
  }
  const double h = 1e-4;
  for (int n : divergence_cutoffs) {
    const MeasureSpec spec{n, true, seed + 1000 + static_cast<std::uint64_t>(n)};
    const SpectralField w = sample_mu_n(spec, 0);
    const double div = divergence_check(w, n, h);
    const double scale = 2.0 * std::sqrt(l2_norm_squared(drift(w, n))) / std::sqrt(l2_norm_squared(w));
    const double scaled = scale > 0.0 ? std::abs(div) / scale : std::abs(div);
    const double linear = divergence_check(w, n, h, [](const SpectralField& v) { return v; });
    const double dim = static_cast<double>(lattice_size(n));
    r.add_exact("divergence_N" + std::to_string(n), div);
    r.add_exact("divergence_scaled_N" + std::to_string(n), scaled);
    r.add_exact("linear_control_N" + std::to_string(n), linear);
    r.check("N " + std::to_string(n) + ": scaled divergence " + fmt(scaled) + " <= 1e-5", scaled <= 1e-5);
    r.check("N " + std::to_string(n) + ": linear control " + fmt(linear) + " = (2N+1)^2 within 1e-6",
            std::abs(linear - dim) <= 1e-6);
  }
  return r;
}

TestReport conservation_test(const FlowParams& p, std::uint64_t seed, double drift_tol, double rk4_min_order,
                             double midpoint_min_order) {
  TestReport r = make_report("conservation", seed);
  Timer timer(r);
  r.parameters = {{"flow", flow_json(p)}, {"drift_tol", drift_tol}, {"rk4_min_order", rk4_min_order},
                  {"midpoint_min_order", midpoint_min_order}};
  const SpectralField w0 = sample_mu_n({p.cutoff, true, seed}, 0);

  FlowParams mid = p;
  mid.integrator = Integrator::implicit_midpoint;
  const Trajectory tr = evolve(w0, mid);
  const double e0 = tr.diagnostics.front().enstrophy;
  double worst = 0.0, worst_ortho = 0.0;
  for (const auto& d : tr.diagnostics) {
    worst = std::max(worst, std::abs(d.enstrophy - e0) / e0);
    worst_ortho = std::max(worst_ortho, std::abs(d.ortho_residual) / d.enstrophy);
  }
  r.add_exact("midpoint_max_relative_enstrophy_drift", worst);
  r.add_exact("max_relative_ortho_residual", worst_ortho);
  r.check("midpoint enstrophy drift " + fmt(worst) + " <= " + fmt(drift_tol), worst <= drift_tol);
  r.check("orthogonality residual " + fmt(worst_ortho) + " <= 1e-10 at every step", worst_ortho <= 1e-10);

  FlowParams rk = p;
  rk.integrator = Integrator::rk4;
  const double rk_order = observed_order(w0, rk);
  const double mid_order = observed_order(w0, mid);
  r.add_exact("rk4_observed_order", rk_order);
  r.add_exact("midpoint_observed_order", mid_order);
  r.check("rk4 observed order " + fmt(rk_order) + " >= " + fmt(rk4_min_order), rk_order >= rk4_min_order);
  r.check("midpoint observed order " + fmt(mid_order) + " >= " + fmt(midpoint_min_order),
          mid_order >= midpoint_min_order);
  return r;
}

namespace {

/// Grid values at the symmetric nodes (2a + 1 - G)/(2G), a = 0..G-1.
GridField symmetric_grid(const SpectralField& f, int g) {
  const GridField raw = to_grid(f, g, 0.5);
  GridField out{g, 0.5, std::vector<double>(raw.values.size())};
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b)
      out.values[static_cast<std::size_t>(a) * g + b] = raw((a + g / 2) % g, (b + g / 2) % g);
  return out;
}

/// Largest violation of f(x1,x2) = f(x2,x1) and f(-x1,x2) = f(x1,x2) on the
/// symmetric grid, relative to max |f|.
std::pair<double, double> kernel_symmetry_defects(const SpectralField& f, int g) {
  const GridField s = symmetric_grid(f, g);
  double scale = 0.0, swap = 0.0, reflect = 0.0;
  for (double v : s.values) scale = std::max(scale, std::abs(v));
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) {
      swap = std::max(swap, std::abs(s(a, b) - s(b, a)));
      reflect = std::max(reflect, std::abs(s(g - 1 - a, b) - s(a, b)));
    }
  return {swap / scale, reflect / scale};
}

/// W = theta (*) theta by direct quadrature on the integer G-grid.
SpectralField self_convolution(const SpectralField& theta, int g) {
  const GridField t = to_grid(theta, g);
  GridField w{g, 0.0, std::vector<double>(t.values.size())};
  const double cell = 1.0 / (static_cast<double>(g) * g);
  for (int a1 = 0; a1 < g; ++a1)
    for (int a2 = 0; a2 < g; ++a2) {
      double acc = 0.0;
      for (int b1 = 0; b1 < g; ++b1)
        for (int b2 = 0; b2 < g; ++b2) acc += t((a1 - b1 + g) % g, (a2 - b2 + g) % g) * t(b1, b2);
      w.values[static_cast<std::size_t>(a1) * g + a2] = acc * cell;
    }
  return from_grid(w, theta.cutoff());
}

}  // namespace

TestReport kernel_lemma_study(const SpectralField& phi, const std::vector<int>& cutoffs, int quadrature_grid,
                              int kmax) {
  if (cutoffs.empty()) throw std::invalid_argument("kernel_lemma_study: no cutoffs");
  int max_n = 0;
  for (int n : cutoffs) max_n = std::max(max_n, n);
  if (quadrature_grid < 4 * max_n + 4 || quadrature_grid % 2 != 0)
    throw std::invalid_argument("kernel_lemma_study: quadrature grid must be even and >= 4 max(N) + 4");
  TestReport r = make_report("kernel_lemma", 0);
  Timer timer(r);
  r.parameters = {{"cutoffs", cutoffs}, {"quadrature_grid", quadrature_grid}, {"kmax", kmax}};
  const int g = quadrature_grid;
  constexpr double tol = 1e-13;

  const std::array<std::pair<const char*, SymmetricMatrix2>, 3> basis{{
      {"identity", {1.0, 0.0, 1.0}},
      {"diag_1_-1", {1.0, 0.0, -1.0}},
      {"offdiag", {0.0, 1.0, 0.0}},
  }};

  for (int n : cutoffs) {
    const std::string tag = "_N" + std::to_string(n);
    const SpectralField theta = dirichlet_kernel(n);
    const SpectralField w = self_convolution(theta, 4 * n + 4);

    const auto [t_swap, t_reflect] = kernel_symmetry_defects(theta, g);
    const auto [w_swap, w_reflect] = kernel_symmetry_defects(w, g);
    r.add_exact("theta_swap_defect" + tag, t_swap);
    r.add_exact("theta_reflect_defect" + tag, t_reflect);
    r.add_exact("W_swap_defect" + tag, w_swap);
    r.add_exact("W_reflect_defect" + tag, w_reflect);
    r.check("(i) N " + std::to_string(n) + ": theta_N symmetric under swap and reflection",
            t_swap <= tol && t_reflect <= tol);
    r.check("(ii) N " + std::to_string(n) + ": W_N symmetric under swap and reflection",
            w_swap <= tol && w_reflect <= tol);

    double conv = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) conv = std::max(conv, std::abs(w.coefficients()[i] - 1.0));
    r.add_exact("W_minus_theta_coefficients" + tag, conv);
    r.check("W_N = theta_N coefficientwise within 1e-12", conv <= 1e-12);

    for (const auto& [name, s] : basis) {
      const double v = symmetry_integral(w, s, g);
      r.add_exact(std::string("symmetry_integral_") + name + tag, v);
      r.check(std::string("(iii) N ") + std::to_string(n) + ", S " + name + ": |integral| " + fmt(std::abs(v)) +
                  " <= 1e-13",
              std::abs(v) <= tol);
    }
  }

  // Negative control: a shifted Dirichlet kernel is not even.
  {
    const int n = cutoffs.front();
    const SpectralField shifted = SpectralField::from_generator(n, [](ModeIndex m) {
      return std::polar(1.0, -2.0 * std::numbers::pi * (0.1 * m.n1 + 0.05 * m.n2));
    });
    const double v = symmetry_integral(shifted, {1.0, 0.0, -1.0}, g);
    r.add_exact("symmetry_integral_shifted_control", v);
    r.check("shifted kernel control is nonzero (" + fmt(v) + ")", std::abs(v) > 1e-6);
  }

  const KernelEval ke(phi, kmax);
  int trace_grid = g;
  for (int n : cutoffs) trace_grid = std::max(trace_grid, exact_trace_grid_size(ke, n));
  r.parameters["trace_grid"] = trace_grid;
  double previous_abs = std::numeric_limits<double>::infinity(), previous_err = 0.0;
  for (int n : cutoffs) {
    const std::string tag = "_N" + std::to_string(n);
    const QuadratureEstimate q = trace_integral(ke, n, trace_grid);
    const double spectral = quadratic_coefficients(phi, n).kernel.trace();
    r.rows.push_back({"trace_integral" + tag, q.value, q.error, 0});
    r.add_exact("spectral_trace" + tag, spectral);
    r.check("spectral trace route exactly 0 at N " + std::to_string(n), spectral == 0.0);
    r.check("(iv) N " + std::to_string(n) + ": |trace| " + fmt(std::abs(q.value)) + " not above previous within bars",
            std::abs(q.value) <= previous_abs + previous_err + q.error);
    previous_abs = std::abs(q.value);
    previous_err = q.error;
  }
  r.check("(iv) last trace integral within its error bar of 0", previous_abs <= previous_err);
  return r;
}

TestReport remainder_fit_test(const SpectralField& phi, int kmax, std::size_t pairs, std::uint64_t seed,
                              double rel_tol) {
  TestReport r = make_report("remainder_fit", seed);
  Timer timer(r);
  r.parameters = {{"kmax", kmax}, {"pairs", pairs}, {"rel_tol", rel_tol}};
  const KernelEval coarse(phi, kmax, KernelWindow::gaussian);
  const KernelEval fine(phi, 2 * kmax, KernelWindow::gaussian);
  const double r_min = coarse.resolved_radius();
  const double r_max = 0.25;
  const LipschitzFit a = fit_remainder_constant(coarse, r_min, r_max, pairs, seed);
  const LipschitzFit b = fit_remainder_constant(fine, r_min, r_max, pairs, seed);
  r.parameters["r_min"] = r_min;
  r.parameters["r_max"] = r_max;
  r.add_exact("lipschitz_constant_kmax", a.constant);
  r.add_exact("lipschitz_constant_2kmax", b.constant);
  r.add_exact("worst_separation_kmax", a.worst_separation);
  const double rel = std::abs(a.constant - b.constant) / std::max(a.constant, b.constant);
  r.check("fitted constant stable under refinement (" + fmt(rel) + " <= " + fmt(rel_tol) + ")", rel <= rel_tol);
  r.check("fitted constant finite", std::isfinite(a.constant) && std::isfinite(b.constant));
  const double sup = hphi_sup_on_grid(coarse, 64);
  r.add_exact("sup_H_on_64_grid", sup);
  r.check("H_phi bounded on the 64^2 off-diagonal grid", std::isfinite(sup));
  return r;
}

}  // namespace enstrophy
