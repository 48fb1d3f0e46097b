#include "enstrophy/measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include "enstrophy/parallel.hpp"
#include "enstrophy/rng.hpp"

namespace enstrophy {

namespace {

std::uint64_t mode_code(ModeIndex n) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.n1)) << 32) |
         static_cast<std::uint32_t>(n.n2);
}

std::string member_file(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "member_%06zu.csv", i);
  return name;
}

}  // namespace

SpectralField sample_mu_n(const MeasureSpec& spec, std::uint64_t index) {
  const std::uint64_t sample_key = stream_key(spec.seed, index);
  SpectralField out(spec.cutoff);
  if (spec.include_zero_mode) {
    CounterRng rng(stream_key(sample_key, mode_code({0, 0})));
    out.set_mean(rng.normal());
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex n = out.mode(i);
    if (!n.is_canonical()) continue;
    CounterRng rng(stream_key(sample_key, mode_code(n)));
    const auto [xi, eta] = rng.normal_pair();
    out.set_mode(n, Complex{xi, eta} / std::numbers::sqrt2);
  }
  return out;
}

DensitySpec DensitySpec::uniform() { return {}; }

DensitySpec DensitySpec::gaussian_tilt(SpectralField phi) {
  validate(phi);
  DensitySpec d;
  d.kind = Kind::gaussian_tilt;
  d.tilt = std::move(phi);
  return d;
}

DensitySpec DensitySpec::truncated(DensitySpec base, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("truncated density: bound must be positive");
  DensitySpec d;
  d.kind = Kind::truncated;
  d.base = std::make_shared<const DensitySpec>(std::move(base));
  d.bound = bound;
  return d;
}

double density_value(const DensitySpec& d, const SpectralField& omega) {
  switch (d.kind) {
    case DensitySpec::Kind::uniform:
      return 1.0;
    case DensitySpec::Kind::gaussian_tilt:
      return std::exp(dual_pairing(omega, *d.tilt) - 0.5 * l2_norm_squared(*d.tilt));
    case DensitySpec::Kind::truncated:
      if (!d.normalization) throw std::invalid_argument("truncated density: normalization Z_M has not been estimated");
      return std::min(density_value(*d.base, omega), d.bound) / d.normalization->value;
  }
  return 0.0;
}

DensitySpec estimate_normalization(const DensitySpec& d, const MeasureSpec& spec, std::size_t samples) {
  if (d.kind != DensitySpec::Kind::truncated)
    throw std::invalid_argument("estimate_normalization: only truncated densities need a normalization");
  std::vector<double> values(samples);
  parallel_for(samples, [&](std::size_t i) {
    values[i] = std::min(density_value(*d.base, sample_mu_n(spec, i)), d.bound);
  });
  DensitySpec out = d;
  out.normalization = mean_estimate(values);
  return out;
}

std::optional<double> analytic_entropy(const DensitySpec& d) {
  switch (d.kind) {
    case DensitySpec::Kind::uniform:
      return 0.0;
    case DensitySpec::Kind::gaussian_tilt:
      return 0.5 * l2_norm_squared(*d.tilt);
    case DensitySpec::Kind::truncated:
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

void check_density_fits(const MeasureSpec& spec, const DensitySpec& d) {
  if (d.kind == DensitySpec::Kind::gaussian_tilt) {
    const SpectralField& phi = *d.tilt;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const ModeIndex n = phi.mode(i);
      if (phi.coefficients()[i] == Complex{}) continue;
      if (n.sup_norm() > spec.cutoff)
        throw std::invalid_argument("gaussian_tilt: test function has modes beyond the measure cutoff");
      if (n.is_zero() && !spec.include_zero_mode)
        throw std::invalid_argument("gaussian_tilt: test function has a mean but the zero mode is not sampled");
    }
  }
  if (d.kind == DensitySpec::Kind::truncated) check_density_fits(spec, *d.base);
}

}  // namespace

Ensemble init_ensemble(const MeasureSpec& spec, const DensitySpec& d, std::size_t count) {
  if (count < 1) throw std::invalid_argument("init_ensemble: member count must be >= 1");
  check_density_fits(spec, d);
  Ensemble e{spec, std::vector<Member>(count), 0.0};
  parallel_for(count, [&](std::size_t i) {
    SpectralField w = sample_mu_n(spec, i);
    const double weight = density_value(d, w);
    e.members[i] = {std::move(w), weight, i};
  });
  return e;
}

Ensemble pushforward(const Ensemble& e, const FlowParams& p) {
  validate(p);
  if (p.cutoff != e.spec.cutoff) throw std::invalid_argument("pushforward: flow cutoff differs from ensemble cutoff");
  Ensemble out{e.spec, std::vector<Member>(e.members.size()), e.time + p.horizon};
  std::vector<std::string> errors(e.members.size());
  parallel_for(e.members.size(), [&](std::size_t i) {
    const Member& m = e.members[i];
    try {
      out.members[i] = {flow_map(m.field, p), m.weight, m.stream_id};
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  std::vector<std::size_t> failed;
  std::string first;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      if (failed.empty()) first = errors[i];
      failed.push_back(i);
    }
  if (!failed.empty()) {
    const std::string message = "pushforward: " + std::to_string(failed.size()) + " member(s) failed, first (member " +
                                std::to_string(failed.front()) + "): " + first;
    throw PushforwardFailure(message, std::move(failed));
  }
  return out;
}

Estimate weighted_mean(const Ensemble& e, const std::function<double(const SpectralField&)>& observable) {
  std::vector<double> values(e.members.size());
  parallel_for(values.size(), [&](std::size_t i) { values[i] = e.members[i].weight * observable(e.members[i].field); });
  return mean_estimate(values);
}

Estimate entropy(const Ensemble& e) {
  std::vector<double> values(e.members.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = e.members[i].weight;
    values[i] = w > 0.0 ? w * std::log(w) : 0.0;
  }
  return mean_estimate(values);
}

TwoRouteResult two_route_check(const Ensemble& evolved, const MeasureSpec& fresh_spec, const DensitySpec& d,
                               std::size_t fresh_count, const FlowParams& p,
                               const std::function<double(const SpectralField&)>& observable) {
  if (fresh_spec.seed == evolved.spec.seed)
    throw std::invalid_argument("two_route_check: the fresh route needs an independent seed");
  TwoRouteResult r;
  r.forward = weighted_mean(evolved, observable);
  std::vector<double> values(fresh_count);
  parallel_for(fresh_count, [&](std::size_t j) {
    const SpectralField v = sample_mu_n(fresh_spec, j);
    values[j] = density_value(d, flow_map(v, p, -1.0)) * observable(v);
  });
  r.backward = mean_estimate(values);
  r.consistent = within_se(r.forward, r.backward);
  return r;
}

Estimate weak_form_residual(const Ensemble& e0, const CylinderFunctional& F, const FlowParams& p) {
  validate(p);
  if (p.forcing) throw std::invalid_argument("weak_form_residual: forcing is not part of b_N");
  if (F.cutoff() > p.cutoff)
    throw std::invalid_argument("weak_form_residual: test functions must satisfy pi_N phi = phi");
  if (std::abs(F.horizon() - p.horizon) > 1e-12 * std::max(1.0, p.horizon))
    throw std::invalid_argument("weak_form_residual: functional horizon differs from flow horizon");

  std::vector<QuadraticForm> forms;
  for (const auto& phi : F.tests()) forms.push_back(quadratic_coefficients(phi, p.cutoff));
  const int steps = p.steps();
  const VectorFieldFn v = flow_vector_field(p);

  auto integrand = [&](double t, const SpectralField& w) {
    const auto coords = F.coordinates(w);
    const auto grad = F.gradient(t, coords);
    double acc = F.time_derivative(t, coords);
    for (std::size_t j = 0; j < forms.size(); ++j)
      if (grad[j] != 0.0) acc += grad[j] * pairing_b_phi(w, forms[j]);
    return acc;
  };

  std::vector<double> residuals(e0.members.size());
  parallel_for(residuals.size(), [&](std::size_t i) {
    SpectralField w = project(e0.members[i].field, p.cutoff);
    const double f0 = F.value(0.0, F.coordinates(w));
    std::vector<double> nodes(steps + 1);
    nodes[0] = integrand(0.0, w);
    for (int k = 1; k <= steps; ++k) {
      w = step(w, p);
      nodes[k] = integrand(k * p.dt, w);
    }
    double integral = 0.0;
    if (steps > 0) {
      nodes.front() *= 0.5;
      nodes.back() *= 0.5;
      integral = pairwise_sum(nodes) * p.dt;
    }
    residuals[i] = e0.members[i].weight * (integral + f0);
  });
  return mean_estimate(residuals);
}

void write_snapshot(const Ensemble& e, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  manifest << "member,stream_id,weight,t\n";
  manifest.precision(17);
  for (std::size_t i = 0; i < e.members.size(); ++i) {
    const Member& m = e.members[i];
    std::ofstream f(dir / member_file(i));
    write_csv(f, m.field);
    if (!f) throw std::runtime_error("write_snapshot: cannot write " + (dir / member_file(i)).string());
    manifest << i << ',' << m.stream_id << ',' << m.weight << ',' << e.time << '\n';
  }
  if (!manifest) throw std::runtime_error("write_snapshot: cannot write manifest in " + dir.string());
}

Ensemble read_snapshot(const std::filesystem::path& dir, const MeasureSpec& spec) {
  std::ifstream manifest(dir / "manifest.csv");
  std::string line;
  if (!std::getline(manifest, line) || line != "member,stream_id,weight,t")
    throw std::runtime_error("read_snapshot: missing or malformed manifest in " + dir.string());
  Ensemble e{spec, {}, 0.0};
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t member = 0;
    std::uint64_t stream = 0;
    double weight = 0.0, t = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> member >> c1 >> stream >> c2 >> weight >> c3 >> t) || member != e.members.size())
      throw std::runtime_error("read_snapshot: bad manifest row '" + line + "'");
    std::ifstream f(dir / member_file(member));
    SpectralField field = read_csv(f);
    if (field.cutoff() != spec.cutoff) throw std::runtime_error("read_snapshot: member cutoff differs from spec");
    e.members.push_back({std::move(field), weight, stream});
    e.time = t;
  }
  if (e.members.empty()) throw std::runtime_error("read_snapshot: ensemble is empty");
  return e;
}

}  // namespace enstrophy
