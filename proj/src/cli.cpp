#include "enstrophy/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "enstrophy/rng.hpp"

#ifndef ENSTROPHY_LAB_VERSION
#define ENSTROPHY_LAB_VERSION "0.0.0"
#endif

namespace enstrophy::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Typed field access with path-qualified errors
// ---------------------------------------------------------------------------

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError(join(path, key), "unknown field");
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long long as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long long>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_double(const json& obj, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  if (const json* v = find(obj, key)) return as_double(*v, join(path, key));
  if (!fallback) throw ConfigError(join(path, key), "required field is missing");
  return *fallback;
}

int get_int(const json& obj, const std::string& path, const char* key, std::optional<int> fallback = {},
            int min = std::numeric_limits<int>::min()) {
  int value;
  if (const json* v = find(obj, key)) {
    const long long raw = as_int(*v, join(path, key));
    if (raw > std::numeric_limits<int>::max() || raw < std::numeric_limits<int>::min())
      throw ConfigError(join(path, key), "out of range");
    value = static_cast<int>(raw);
  } else if (fallback) {
    value = *fallback;
  } else {
    throw ConfigError(join(path, key), "required field is missing");
  }
  if (value < min) throw ConfigError(join(path, key), "must be >= " + std::to_string(min));
  return value;
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (const json* v = find(obj, key)) {
    if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
    return v->get<bool>();
  }
  return fallback;
}

double get_positive(const json& obj, const std::string& path, const char* key, double fallback) {
  const double v = get_double(obj, path, key, fallback);
  if (!(v > 0.0)) throw ConfigError(join(path, key), "must be positive");
  return v;
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       std::optional<std::string> fallback = {}) {
  if (const json* v = find(obj, key)) {
    if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
    return v->get<std::string>();
  }
  if (!fallback) throw ConfigError(join(path, key), "required field is missing");
  return *fallback;
}

std::vector<int> get_int_list(const json& obj, const std::string& path, const char* key, std::vector<int> fallback,
                              int min = 0) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string p = join(path, key);
  if (!v->is_array() || v->empty()) throw ConfigError(p, "expected a non-empty list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const long long raw = as_int((*v)[i], join(p, i));
    if (raw < min || raw > 4096) throw ConfigError(join(p, i), "must be in [" + std::to_string(min) + ", 4096]");
    out.push_back(static_cast<int>(raw));
  }
  return out;
}

std::vector<double> get_double_list(const json& obj, const std::string& path, const char* key,
                                    std::vector<double> fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string p = join(path, key);
  if (!v->is_array() || v->empty()) throw ConfigError(p, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_double((*v)[i], join(p, i)));
  return out;
}

void require_ascending(const std::vector<int>& v, const std::string& path) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) throw ConfigError(path, "must be strictly ascending");
}

// ---------------------------------------------------------------------------
// Domain objects
// ---------------------------------------------------------------------------

ModeIndex parse_mode(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a mode [n1, n2]");
  const long long a = as_int(j[0], join(path, 0)), b = as_int(j[1], join(path, 1));
  if (std::max(std::llabs(a), std::llabs(b)) > 1024) throw ConfigError(path, "mode is out of range");
  return {static_cast<int>(a), static_cast<int>(b)};
}

FlowParams parse_flow(const json& j, const std::string& path, FlowParams base) {
  require_object(j, path);
  allow_keys(j, path, {"dt", "horizon", "integrator", "midpoint_tol", "midpoint_max_iter"});
  base.dt = get_double(j, path, "dt", base.dt);
  base.horizon = get_double(j, path, "horizon", base.horizon);
  if (find(j, "integrator")) {
    try {
      base.integrator = integrator_from_string(get_string(j, path, "integrator"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join(path, "integrator"), e.what());
    }
  }
  base.midpoint_tol = get_double(j, path, "midpoint_tol", base.midpoint_tol);
  base.midpoint_max_iter = get_int(j, path, "midpoint_max_iter", base.midpoint_max_iter, 1);
  if (!(base.dt > 0.0)) throw ConfigError(join(path, "dt"), "must be positive");
  if (!(base.horizon >= 0.0)) throw ConfigError(join(path, "horizon"), "must be >= 0");
  const double ratio = base.horizon / base.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError(join(path, "horizon"), "horizon / dt = " + std::to_string(ratio) + " is not an integer");
  if (!(base.midpoint_tol > 0.0)) throw ConfigError(join(path, "midpoint_tol"), "must be positive");
  return base;
}

DensitySpec parse_density(const json& j, const std::string& path, const MeasureSpec& spec, int depth = 0) {
  require_object(j, path);
  allow_keys(j, path, {"kind", "phi", "base", "bound", "normalization_samples"});
  const std::string kind = get_string(j, path, "kind");
  if (kind == "uniform") return DensitySpec::uniform();
  if (kind == "gaussian_tilt") {
    if (!find(j, "phi")) throw ConfigError(join(path, "phi"), "required for gaussian_tilt");
    SpectralField phi = parse_field(j["phi"], join(path, "phi"));
    if (phi.cutoff() > spec.cutoff) throw ConfigError(join(path, "phi"), "has modes beyond the measure cutoff");
    if (phi[{0, 0}] != Complex{} && !spec.include_zero_mode)
      throw ConfigError(join(path, "phi"), "has a mean but the zero mode is not sampled");
    return DensitySpec::gaussian_tilt(std::move(phi));
  }
  if (kind == "truncated") {
    if (depth > 0) throw ConfigError(join(path, "kind"), "truncated densities cannot be nested");
    if (!find(j, "base")) throw ConfigError(join(path, "base"), "required for truncated");
    const double bound = get_double(j, path, "bound");
    if (!(bound > 0.0)) throw ConfigError(join(path, "bound"), "must be positive");
    const int z_samples = get_int(j, path, "normalization_samples", 100000, 1);
    DensitySpec d = DensitySpec::truncated(parse_density(j["base"], join(path, "base"), spec, depth + 1), bound);
    MeasureSpec z_spec = spec;
    z_spec.seed = mix64(spec.seed ^ 0x7a5f3c1du);
    return estimate_normalization(d, z_spec, static_cast<std::size_t>(z_samples));
  }
  throw ConfigError(join(path, "kind"), "unknown density '" + kind + "' (expected uniform, gaussian_tilt or truncated)");
}

struct KernelSpec {
  std::string type;
  KernelFamily family;
  int fixed_cutoff = -1;  ///< cutoff of a family that does not depend on N
};

KernelSpec parse_kernel(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = get_string(j, path, "type");
  KernelSpec k{type, {}, -1};
  if (type == "drift") {
    allow_keys(j, path, {"type", "phi"});
    if (!find(j, "phi")) throw ConfigError(join(path, "phi"), "required for a drift kernel");
    const SpectralField phi = parse_field(j["phi"], join(path, "phi"));
    k.family = [phi](int n) { return quadratic_coefficients(phi, n).kernel; };
  } else if (type == "translation") {
    allow_keys(j, path, {"type", "profile"});
    if (!find(j, "profile")) throw ConfigError(join(path, "profile"), "required for a translation kernel");
    const SpectralField c = parse_field(j["profile"], join(path, "profile"));
    for (std::size_t i = 0; i < c.size(); ++i)
      if (std::abs(c.coefficients()[i] - c[-c.mode(i)]) > kExactTol)
        throw ConfigError(join(path, "profile"), "must be even (cosine terms only)");
    k.family = [c](int) { return translation_kernel(c); };
    k.fixed_cutoff = c.cutoff();
  } else if (type == "rank_one") {
    allow_keys(j, path, {"type", "a", "b"});
    if (!find(j, "a")) throw ConfigError(join(path, "a"), "required for a rank_one kernel");
    const SpectralField a = parse_field(j["a"], join(path, "a"));
    const SpectralField b = find(j, "b") ? parse_field(j["b"], join(path, "b")) : a;
    k.family = [a, b](int) { return separable_kernel(a, b); };
    k.fixed_cutoff = std::max(a.cutoff(), b.cutoff());
  } else if (type == "zero") {
    allow_keys(j, path, {"type"});
    k.family = [](int n) { return CoefficientKernel(n, {}); };
  } else {
    throw ConfigError(join(path, "type"),
                      "unknown kernel '" + type + "' (expected drift, translation, rank_one or zero)");
  }
  return k;
}

CylinderFunctional parse_functional(const json& j, const std::string& path, double horizon, int cutoff) {
  require_object(j, path);
  allow_keys(j, path, {"tests", "terms"});
  const json* tests = find(j, "tests");
  const json* terms = find(j, "terms");
  if (!tests || !tests->is_array() || tests->empty())
    throw ConfigError(join(path, "tests"), "expected a non-empty list of test functions");
  if (!terms || !terms->is_array() || terms->empty())
    throw ConfigError(join(path, "terms"), "expected a non-empty list of terms");
  std::vector<SpectralField> phis;
  for (std::size_t i = 0; i < tests->size(); ++i) {
    const std::string p = join(join(path, "tests"), i);
    phis.push_back(parse_field((*tests)[i], p));
    if (phis.back().cutoff() > cutoff) throw ConfigError(p, "test function must satisfy pi_N phi = phi");
  }
  std::vector<CylinderTerm> out;
  for (std::size_t i = 0; i < terms->size(); ++i) {
    const std::string p = join(join(path, "terms"), i);
    const json& t = (*terms)[i];
    require_object(t, p);
    allow_keys(t, p, {"test", "outer", "time", "amplitude"});
    CylinderTerm term;
    term.test_index = get_int(t, p, "test", 0, 0);
    if (term.test_index >= static_cast<int>(phis.size())) throw ConfigError(join(p, "test"), "no such test function");
    try {
      term.outer = outer_from_string(get_string(t, p, "outer", std::string("sin")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join(p, "outer"), e.what());
    }
    try {
      term.time = time_from_string(get_string(t, p, "time", std::string("linear_decay")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join(p, "time"), e.what());
    }
    term.amplitude = get_double(t, p, "amplitude", 1.0);
    out.push_back(term);
  }
  if (!(horizon > 0.0)) throw ConfigError(path, "a cylinder functional needs flow.horizon > 0");
  return CylinderFunctional(std::move(phis), std::move(out), horizon);
}

TestReport merge_reports(std::string name, std::uint64_t seed, const std::vector<TestReport>& parts) {
  TestReport r;
  r.name = std::move(name);
  r.seed = seed;
  r.parameters = nlohmann::ordered_json::object();
  for (const auto& part : parts) {
    r.parameters[part.name] = part.parameters;
    for (const auto& row : part.rows) r.rows.push_back({part.name + ":" + row.quantity, row.estimate, row.std_error,
                                                        row.samples});
    for (const auto& c : part.checks) r.checks.push_back({part.name + ": " + c.description, c.passed});
    r.runtime_seconds += part.runtime_seconds;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Jobs
// ---------------------------------------------------------------------------

struct Defaults {
  std::uint64_t seed = 0;
  int cutoff = 4;
  std::size_t samples = 10000;
  bool include_zero_mode = true;
  FlowParams flow;
  json density = {{"kind", "uniform"}};
};

Job parse_job(const json& t, const std::string& path, const Defaults& d, std::set<std::string>& names) {
  require_object(t, path);
  const std::string kind = get_string(t, path, "kind");
  const std::string name = get_string(t, path, "name", kind);
  if (name.empty() || name.find_first_of("/\\ ") != std::string::npos || name.front() == '.')
    throw ConfigError(join(path, "name"), "must be a plain file name");
  if (!names.insert(name).second) throw ConfigError(join(path, "name"), "duplicate test name '" + name + "'");

  const std::uint64_t seed = d.seed + static_cast<std::uint64_t>(get_int(t, path, "seed_offset", 0, 0));
  const int cutoff = get_int(t, path, "cutoff", d.cutoff, 0);
  const auto samples = static_cast<std::size_t>(get_int(t, path, "samples", static_cast<int>(d.samples), 1));
  const MeasureSpec spec{cutoff, d.include_zero_mode, seed};
  FlowParams flow = d.flow;
  flow.cutoff = cutoff;
  if (const json* f = find(t, "flow")) flow = parse_flow(*f, join(path, "flow"), flow);

  auto kernel_at = [&](const char* key) {
    if (!find(t, key)) throw ConfigError(join(path, key), "required for " + kind);
    KernelSpec k = parse_kernel(t[key], join(path, key));
    if (k.fixed_cutoff > cutoff) throw ConfigError(join(path, key), "kernel has modes beyond the test cutoff");
    return k;
  };
  auto field_at = [&](const char* key) {
    if (!find(t, key)) throw ConfigError(join(path, key), "required for " + kind);
    return parse_field(t[key], join(path, key));
  };

  if (kind == "drift_oracle") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "cutoffs", "fields", "tol"});
    const auto cutoffs = get_int_list(t, path, "cutoffs", {2, 4, 8, 16});
    const int fields = get_int(t, path, "fields", 50, 1);
    const double tol = get_positive(t, path, "tol", 1e-12);
    return {name, [=] {
              auto r = drift_oracle_test(cutoffs, fields, seed, tol);
              r.name = name;
              return r;
            }};
  }
  if (kind == "exact_identities") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "cutoffs", "divergence_cutoffs", "fields"});
    const auto cutoffs = get_int_list(t, path, "cutoffs", {2, 4, 8, 16});
    const auto div = get_int_list(t, path, "divergence_cutoffs", {1, 2, 3, 4});
    const int fields = get_int(t, path, "fields", 100, 1);
    return {name, [=] {
              auto r = exact_identities_test(cutoffs, div, fields, seed);
              r.name = name;
              return r;
            }};
  }
  if (kind == "conservation") {
    allow_keys(t, path,
               {"kind", "name", "seed_offset", "cutoff", "flow", "drift_tol", "rk4_min_order", "midpoint_min_order"});
    const double drift_tol = get_positive(t, path, "drift_tol", 1e-9);
    const double rk4 = get_double(t, path, "rk4_min_order", 3.9);
    const double mid = get_double(t, path, "midpoint_min_order", 1.9);
    if (flow.steps() < 1) throw ConfigError(join(path, "flow.horizon"), "conservation needs at least one step");
    return {name, [=] {
              auto r = conservation_test(flow, seed, drift_tol, rk4, mid);
              r.name = name;
              return r;
            }};
  }
  if (kind == "wick_mean" || kind == "wick_variance") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "cutoff", "samples", "kernel", "rel_tol"});
    const KernelSpec k = kernel_at("kernel");
    const double rel_tol = get_positive(t, path, "rel_tol", 0.05);
    if (kind == "wick_mean" && find(t, "rel_tol")) throw ConfigError(join(path, "rel_tol"), "unknown field");
    return {name, [=] {
              const CoefficientKernel kernel = k.family(cutoff);
              auto r = kind == "wick_mean" ? wick_mean_test(k.type, kernel, spec, samples)
                                           : wick_variance_test(k.type, kernel, spec, samples, rel_tol);
              r.name = name;
              return r;
            }};
  }
  if (kind == "moment_bound") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "cutoff", "samples", "kernel", "orders"});
    const KernelSpec k = kernel_at("kernel");
    const auto orders = get_int_list(t, path, "orders", {2, 3, 4}, 2);
    for (std::size_t i = 0; i < orders.size(); ++i)
      if (orders[i] > 6) throw ConfigError(join(join(path, "orders"), i), "orders above 6 are not supported");
    return {name, [=] {
              const CoefficientKernel kernel = k.family(cutoff);
              std::vector<TestReport> parts;
              for (int p : orders) parts.push_back(moment_bound_test(k.type, kernel, p, spec, samples));
              return merge_reports(name, seed, parts);
            }};
  }
  if (kind == "exp_integrability") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "samples", "kernel", "eps", "cutoffs", "asserted_max"});
    const KernelSpec k = kernel_at("kernel");
    const auto eps = get_double_list(t, path, "eps", {0.1, 0.25, 0.4});
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (!(eps[i] > 0.0)) throw ConfigError(join(join(path, "eps"), i), "must be positive");
    const auto cutoffs = get_int_list(t, path, "cutoffs", {4, 8, 16}, 1);
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
      if (k.fixed_cutoff > cutoffs[i]) throw ConfigError(join(join(path, "cutoffs"), i), "below the kernel cutoff");
    const double asserted = get_positive(t, path, "asserted_max", 0.4);
    return {name, [=] {
              auto r = exp_integrability_test(k.type, k.family, eps, cutoffs, spec, samples, asserted);
              r.name = name;
              return r;
            }};
  }
  if (kind == "exp_series") {
    allow_keys(t, path, {"kind", "name", "eps"});
    const auto eps = get_double_list(t, path, "eps", {0.4, 0.6});
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (!(eps[i] > 0.0)) throw ConfigError(join(join(path, "eps"), i), "must be positive");
    return {name, [=] {
              auto r = exp_series_test(eps);
              r.name = name;
              return r;
            }};
  }
  if (kind == "cauchy") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "samples", "phi", "cutoffs", "rel_tol"});
    const SpectralField phi = field_at("phi");
    const auto cutoffs = get_int_list(t, path, "cutoffs", {4, 8, 16, 32}, 1);
    require_ascending(cutoffs, join(path, "cutoffs"));
    if (cutoffs.size() < 2) throw ConfigError(join(path, "cutoffs"), "need at least two cutoffs");
    const double rel_tol = get_positive(t, path, "rel_tol", 0.10);
    const MeasureSpec ref{cutoffs.back(), d.include_zero_mode, seed};
    return {name, [=] {
              auto r = cauchy_study(phi, cutoffs, ref, samples, rel_tol);
              r.name = name;
              return r;
            }};
  }
  if (kind == "invariance") {
    allow_keys(t, path,
               {"kind", "name", "seed_offset", "cutoff", "samples", "flow", "observables", "forcing", "expect_reject"});
    const json* obs = find(t, "observables");
    if (!obs || !obs->is_array() || obs->empty())
      throw ConfigError(join(path, "observables"), "expected a non-empty list of test functions");
    std::vector<SpectralField> observables;
    for (std::size_t i = 0; i < obs->size(); ++i)
      observables.push_back(parse_field((*obs)[i], join(join(path, "observables"), i)));
    if (find(t, "forcing")) {
      SpectralField forcing = field_at("forcing");
      if (forcing.cutoff() > cutoff) throw ConfigError(join(path, "forcing"), "has modes beyond the test cutoff");
      flow.forcing = std::move(forcing);
    }
    const bool reject = get_bool(t, path, "expect_reject", false);
    return {name, [=] {
              auto r = invariance_test(spec, flow, observables, samples, reject);
              r.name = name;
              return r;
            }};
  }
  if (kind == "continuity") {
    allow_keys(t, path,
               {"kind", "name", "seed_offset", "cutoff", "samples", "flow", "density", "functional",
                "weak_form_constant", "fresh_samples"});
    const DensitySpec density =
        parse_density(find(t, "density") ? t["density"] : d.density, find(t, "density") ? join(path, "density") : "density",
                      spec);
    if (!find(t, "functional")) throw ConfigError(join(path, "functional"), "required for continuity");
    const CylinderFunctional F = parse_functional(t["functional"], join(path, "functional"), flow.horizon, cutoff);
    ContinuityOptions opts;
    opts.weak_form_constant = get_double(t, path, "weak_form_constant", 1.0);
    if (opts.weak_form_constant < 0.0) throw ConfigError(join(path, "weak_form_constant"), "must be >= 0");
    opts.fresh_count = static_cast<std::size_t>(get_int(t, path, "fresh_samples", static_cast<int>(samples), 1));
    return {name, [=] {
              auto r = continuity_test(spec, density, F, flow, samples, opts);
              r.name = name;
              return r;
            }};
  }
  if (kind == "kernel_lemma") {
    allow_keys(t, path, {"kind", "name", "phi", "cutoffs", "grid", "kmax"});
    const SpectralField phi = field_at("phi");
    const auto cutoffs = get_int_list(t, path, "cutoffs", {2, 4, 8}, 1);
    const int max_n = *std::max_element(cutoffs.begin(), cutoffs.end());
    int fallback = 4 * max_n + 4;
    const int grid = get_int(t, path, "grid", fallback, 2);
    if (grid < 4 * max_n + 4 || grid % 2 != 0)
      throw ConfigError(join(path, "grid"), "must be even and >= 4 max(cutoffs) + 4 = " + std::to_string(fallback));
    const int kmax = get_int(t, path, "kmax", 64, 1);
    return {name, [=] {
              auto r = kernel_lemma_study(phi, cutoffs, grid, kmax);
              r.name = name;
              return r;
            }};
  }
  if (kind == "remainder_fit") {
    allow_keys(t, path, {"kind", "name", "seed_offset", "phi", "kmax", "pairs", "rel_tol"});
    const SpectralField phi = field_at("phi");
    const int kmax = get_int(t, path, "kmax", 64, 4);
    const int pairs = get_int(t, path, "pairs", 2000, 1);
    const double rel_tol = get_positive(t, path, "rel_tol", 0.1);
    return {name, [=] {
              auto r = remainder_fit_test(phi, kmax, pairs, seed, rel_tol);
              r.name = name;
              return r;
            }};
  }
  throw ConfigError(join(path, "kind"), "unknown test kind '" + kind + "'");
}

void write_atomic(const fs::path& target, const std::string& bytes) {
  fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SpectralField parse_field(const json& terms, const std::string& path) {
  if (!terms.is_array()) throw ConfigError(path, "expected a list of trig terms");
  int cutoff = 0;
  std::vector<std::pair<ModeIndex, Complex>> coeffs;  // value at n (mirror is conjugate)
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = join(path, i);
    const json& t = terms[i];
    require_object(t, p);
    allow_keys(t, p, {"cos", "sin", "const", "amp"});
    const int kinds = static_cast<int>(t.contains("cos")) + t.contains("sin") + t.contains("const");
    if (kinds != 1) throw ConfigError(p, "exactly one of cos, sin or const is required");
    if (t.contains("const")) {
      if (t.contains("amp")) throw ConfigError(join(p, "amp"), "not used with const");
      coeffs.emplace_back(ModeIndex{0, 0}, as_double(t["const"], join(p, "const")));
      continue;
    }
    const bool is_cos = t.contains("cos");
    const std::string key = is_cos ? "cos" : "sin";
    ModeIndex n = parse_mode(t[key], join(p, key));
    if (n.is_zero()) throw ConfigError(join(p, key), "use const for the zero mode");
    double amp = get_double(t, p, "amp", 1.0);
    if (!n.is_canonical()) {
      n = -n;
      if (!is_cos) amp = -amp;  // sin(-x) = -sin(x)
    }
    cutoff = std::max(cutoff, n.sup_norm());
    // amp cos(2 pi n.x) -> amp/2 at n; amp sin(2 pi n.x) -> -i amp/2 at n
    coeffs.emplace_back(n, is_cos ? Complex{0.5 * amp, 0.0} : Complex{0.0, -0.5 * amp});
  }
  SpectralField f(cutoff);
  for (const auto& [n, c] : coeffs) {
    if (n.is_zero())
      f.set_mean(f[n].real() + c.real());
    else
      f.set_mode(n, f[n] + c);
  }
  return f;
}

Experiment parse_experiment(const json& config, std::optional<std::uint64_t> seed_override) {
  require_object(config, "");
  allow_keys(config, "",
             {"name", "seed", "cutoff", "samples", "include_zero_mode", "output_dir", "flow", "density", "tests"});
  Experiment e;
  e.name = get_string(config, "", "name");
  if (!find(config, "seed")) throw ConfigError("seed", "required field is missing");
  e.seed = seed_override ? *seed_override : as_u64(config["seed"], "seed");
  e.output_dir = get_string(config, "", "output_dir", std::string("out"));

  Defaults d;
  d.seed = e.seed;
  d.cutoff = get_int(config, "", "cutoff", 4, 0);
  d.samples = static_cast<std::size_t>(get_int(config, "", "samples", 10000, 1));
  d.include_zero_mode = get_bool(config, "", "include_zero_mode", true);
  d.flow.cutoff = d.cutoff;
  if (const json* f = find(config, "flow")) d.flow = parse_flow(*f, "flow", d.flow);
  if (const json* den = find(config, "density")) {
    // Validate eagerly so errors point at the global field.
    parse_density(*den, "density", {d.cutoff, d.include_zero_mode, d.seed});
    d.density = *den;
  }

  const json* tests = find(config, "tests");
  if (!tests) return e;
  if (!tests->is_array()) throw ConfigError("tests", "expected a list");
  std::set<std::string> names;
  for (std::size_t i = 0; i < tests->size(); ++i) e.jobs.push_back(parse_job((*tests)[i], join("tests", i), d, names));
  return e;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

int run(const fs::path& config_path, const RunOptions& options, std::ostream& log) {
  std::string config_bytes;
  Experiment experiment;
  try {
    config_bytes = read_file(config_path);
    json config;
    try {
      config = json::parse(config_bytes);
    } catch (const json::parse_error& e) {
      throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
    }
    experiment = parse_experiment(config, options.seed_override);
  } catch (const ConfigError& e) {
    log << "config error in " << config_path.string() << " at " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    log << "config error in " << config_path.string() << ": " << e.what() << "\n";
    return kExitConfigError;
  }

  fs::path out_dir = options.out_dir ? *options.out_dir : experiment.output_dir;
  if (out_dir.is_relative() && !options.out_dir) out_dir = config_path.parent_path() / out_dir;

  std::vector<std::pair<std::string, std::string>> written;  // relative path, sha256
  auto emit = [&](const std::string& relative, const std::string& bytes) {
    write_atomic(out_dir / relative, bytes);
    written.emplace_back(relative, sha256_hex(bytes));
  };

  std::ostringstream summary;
  summary << "test,passed,checks,failed_checks\n";
  bool all_passed = true;
  for (const auto& job : experiment.jobs) {
    log << "[run] " << job.name << " ... " << std::flush;
    TestReport report;
    const auto start = std::chrono::steady_clock::now();
    try {
      report = job.run();
    } catch (const std::exception& e) {
      report.name = job.name;
      report.seed = experiment.seed;
      report.check(std::string("battery raised: ") + e.what(), false);
    }
    report.name = job.name;
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::size_t failed = 0;
    for (const auto& c : report.checks) failed += c.passed ? 0 : 1;
    all_passed = all_passed && report.passed();
    log << (report.passed() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2)
        << report.runtime_seconds << " s)\n";
    log.unsetf(std::ios::floatfield);
    for (const auto& c : report.checks)
      if (!c.passed) log << "      failed: " << c.description << "\n";

    emit("reports/" + job.name + ".json", to_json(report).dump(2) + "\n");
    std::ostringstream csv;
    write_csv(csv, report);
    emit("reports/" + job.name + ".csv", csv.str());
    summary << job.name << ',' << (report.passed() ? "true" : "false") << ',' << report.checks.size() << ','
            << failed << '\n';
  }
  emit("summary.csv", summary.str());

  nlohmann::ordered_json manifest;
  manifest["name"] = experiment.name;
  manifest["version"] = ENSTROPHY_LAB_VERSION;
  manifest["config_sha256"] = sha256_hex(config_bytes);
  manifest["seed"] = experiment.seed;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [path, hash] : written) files.push_back({{"path", path}, {"sha256", hash}});
  manifest["files"] = std::move(files);
  write_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");

  log << (all_passed ? "all tests passed" : "some tests FAILED") << "; artifacts in " << out_dir.string() << "\n";
  return all_passed ? kExitPass : kExitTestFailure;
}

int bench(int max_n, std::ostream& out) {
  if (max_n < 0) throw std::invalid_argument("bench: max-n must be >= 0");
  std::vector<int> cutoffs{0};
  for (int n = 2; n <= max_n; n *= 2) cutoffs.push_back(n);
  out << std::left << std::setw(6) << "N" << std::setw(8) << "grid" << std::setw(18) << "direct evals/s"
      << std::setw(20) << "dealiased evals/s" << "rel l2 diff\n";
  int status = kExitPass;
  for (int n : cutoffs) {
    const SpectralField w = sample_mu_n({n, true, 0x5eed}, 0);
    const SpectralField a = drift(w, n, DriftStrategy::direct);
    const SpectralField b = drift(w, n, DriftStrategy::dealiased);
    const double scale = std::sqrt(l2_norm_squared(a));
    const double diff = std::sqrt(l2_norm_squared(a - b)) / (scale > 0.0 ? scale : 1.0);
    if (diff > 1e-12) {
      out << "N " << n << ": strategies disagree (relative difference " << diff << "), not timing\n";
      status = kExitTestFailure;
      continue;
    }
    auto rate = [&](DriftStrategy s) {
      using clock = std::chrono::steady_clock;
      std::size_t reps = 0;
      double sink = 0.0;
      const auto start = clock::now();
      double elapsed = 0.0;
      do {
        sink += drift(w, n, s)[{0, 0}].real();
        ++reps;
        elapsed = std::chrono::duration<double>(clock::now() - start).count();
      } while (elapsed < 0.25);
      if (!std::isfinite(sink)) out << "non-finite drift\n";
      return reps / elapsed;
    };
    out << std::left << std::setw(6) << n << std::setw(8) << (n == 0 ? 0 : dealiased_grid_size(n)) << std::setw(18)
        << std::setprecision(4) << rate(DriftStrategy::direct) << std::setw(20) << rate(DriftStrategy::dealiased)
        << diff << "\n";
  }
  return status;
}

}  // namespace enstrophy::cli
