#include "enstrophy/flow.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace enstrophy {

std::string to_string(Integrator integrator) {
  return integrator == Integrator::rk4 ? "rk4" : "implicit_midpoint";
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "implicit_midpoint") return Integrator::implicit_midpoint;
  throw std::invalid_argument("unknown integrator '" + name + "' (expected rk4 or implicit_midpoint)");
}

int FlowParams::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

void validate(const FlowParams& p) {
  if (p.cutoff < 0) throw std::invalid_argument("flow.cutoff: must be >= 0");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw std::invalid_argument("flow.dt: must be positive");
  if (!(p.horizon >= 0.0) || !std::isfinite(p.horizon)) throw std::invalid_argument("flow.horizon: must be >= 0");
  const double ratio = p.horizon / p.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("flow.horizon: T/dt = " + std::to_string(ratio) + " is not an integer");
  if (!(p.midpoint_tol > 0.0)) throw std::invalid_argument("flow.midpoint_tol: must be positive");
  if (p.midpoint_max_iter < 1) throw std::invalid_argument("flow.midpoint_max_iter: must be >= 1");
  if (p.forcing && p.forcing->cutoff() > p.cutoff)
    throw std::invalid_argument("flow.forcing: cutoff exceeds flow cutoff");
}

VectorFieldFn flow_vector_field(const FlowParams& p, double direction) {
  const int n = p.cutoff;
  if (!p.forcing) return [n, direction](const SpectralField& w) {
      SpectralField b = drift(w, n);
      if (direction != 1.0) b *= direction;
      return b;
    };
  const SpectralField forcing = project(*p.forcing, n);
  return [n, direction, forcing](const SpectralField& w) {
    SpectralField b = drift(w, n);
    b += forcing;
    if (direction != 1.0) b *= direction;
    return b;
  };
}

namespace {

double l2(const SpectralField& f) { return std::sqrt(l2_norm_squared(f)); }

SpectralField rk4_step(const SpectralField& w, double dt, const VectorFieldFn& v) {
  const SpectralField k1 = v(w);
  SpectralField s = w;
  s.axpy(0.5 * dt, k1);
  const SpectralField k2 = v(s);
  s = w;
  s.axpy(0.5 * dt, k2);
  const SpectralField k3 = v(s);
  s = w;
  s.axpy(dt, k3);
  const SpectralField k4 = v(s);
  SpectralField out = w;
  out.axpy(dt / 6.0, k1);
  out.axpy(dt / 3.0, k2);
  out.axpy(dt / 3.0, k3);
  out.axpy(dt / 6.0, k4);
  return out;
}

SpectralField midpoint_step(const SpectralField& w, const FlowParams& p, const VectorFieldFn& v) {
  const double dt = p.dt;
  // Explicit midpoint predictor.
  SpectralField half = w;
  half.axpy(0.5 * dt, v(w));
  SpectralField next = w;
  next.axpy(dt, v(half));

  const double scale = std::max(l2(w), std::numeric_limits<double>::min());
  double residual = 0.0;
  for (int it = 1; it <= p.midpoint_max_iter; ++it) {
    SpectralField mid = w;
    mid += next;
    mid *= 0.5;
    SpectralField candidate = w;
    candidate.axpy(dt, v(mid));
    SpectralField delta = candidate;
    delta -= next;
    residual = l2(delta);
    next = std::move(candidate);
    if (residual <= p.midpoint_tol * scale) return next;
  }
  std::ostringstream msg;
  msg << "implicit midpoint: no convergence after " << p.midpoint_max_iter << " iterations (relative residual "
      << residual / scale << ", dt " << dt << ")";
  throw StepFailure(msg.str(), p.midpoint_max_iter, residual / scale);
}

SpectralField step_with(const SpectralField& w, const FlowParams& p, const VectorFieldFn& v) {
  return p.integrator == Integrator::rk4 ? rk4_step(w, p.dt, v) : midpoint_step(w, p, v);
}

Trajectory run(const SpectralField& omega0, const FlowParams& p, double direction) {
  validate(p);
  const VectorFieldFn v = flow_vector_field(p, direction);
  Trajectory tr;
  SpectralField w = project(omega0, p.cutoff);
  const int steps = p.steps();
  tr.times.reserve(steps + 1);
  tr.fields.reserve(steps + 1);
  tr.diagnostics.reserve(steps + 1);
  for (int k = 0;; ++k) {
    const double t = direction * k * p.dt;
    tr.times.push_back(t);
    tr.diagnostics.push_back(diagnose(w, k, t));
    tr.fields.push_back(w);
    if (k == steps) break;
    w = step_with(w, p, v);
  }
  return tr;
}

}  // namespace

SpectralField step(const SpectralField& omega, const FlowParams& p, double direction) {
  validate(p);
  return step_with(project(omega, p.cutoff), p, flow_vector_field(p, direction));
}

double energy(const SpectralField& omega) {
  const VelocityField u = biot_savart(omega);
  return l2_norm_squared(u.u1) + l2_norm_squared(u.u2);
}

StepDiagnostics diagnose(const SpectralField& omega, int step, double t) {
  const SpectralField b = drift(omega, omega.cutoff());
  return {step, t, l2_norm_squared(omega), energy(omega), dual_pairing(b, omega)};
}

Trajectory evolve(const SpectralField& omega0, const FlowParams& p) { return run(omega0, p, 1.0); }

Trajectory evolve_backward(const SpectralField& omega, const FlowParams& p) { return run(omega, p, -1.0); }

SpectralField flow_map(const SpectralField& omega0, const FlowParams& p, double direction) {
  validate(p);
  const VectorFieldFn v = flow_vector_field(p, direction);
  SpectralField w = project(omega0, p.cutoff);
  for (int k = 0; k < p.steps(); ++k) w = step_with(w, p, v);
  return w;
}

void write_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,t,enstrophy,energy,ortho_residual\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& d : trajectory.diagnostics) {
    row.str("");
    row << d.step << ',' << d.t << ',' << d.enstrophy << ',' << d.energy << ',' << d.ortho_residual << '\n';
    out << row.str();
  }
}

double divergence_check(const SpectralField& omega, int cutoff, double h, const VectorFieldFn& field) {
  if (!(h > 0.0)) throw std::invalid_argument("divergence_check: step must be positive");
  const VectorFieldFn v = field ? field : VectorFieldFn([cutoff](const SpectralField& w) { return drift(w, cutoff); });
  const SpectralField base = project(omega, cutoff);

  // Perturb one real coordinate and read back the same coordinate of v.
  auto partial = [&](ModeIndex n, bool imaginary) {
    auto shifted = [&](double s) {
      SpectralField w = base;
      if (n.is_zero()) {
        w.set_mean(base[n].real() + s);
      } else {
        w.set_mode(n, base[n] + (imaginary ? Complex{0.0, s} : Complex{s, 0.0}));
      }
      const Complex c = v(w)[n];
      return imaginary ? c.imag() : c.real();
    };
    return (shifted(h) - shifted(-h)) / (2.0 * h);
  };

  std::vector<double> terms;
  terms.push_back(partial({0, 0}, false));
  for (std::size_t i = 0; i < base.size(); ++i) {
    const ModeIndex n = base.mode(i);
    if (!n.is_canonical()) continue;
    terms.push_back(partial(n, false));
    terms.push_back(partial(n, true));
  }
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

double observed_order(const SpectralField& omega0, const FlowParams& p) {
  FlowParams coarse = p, medium = p, fine = p;
  medium.dt = p.dt / 2.0;
  fine.dt = p.dt / 4.0;
  const SpectralField a = flow_map(omega0, coarse);
  const SpectralField b = flow_map(omega0, medium);
  const SpectralField c = flow_map(omega0, fine);
  return std::log2(l2(a - b) / l2(b - c));
}

}  // namespace enstrophy
