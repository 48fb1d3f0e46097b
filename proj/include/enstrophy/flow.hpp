#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "enstrophy/dynamics.hpp"

namespace enstrophy {

enum class Integrator { rk4, implicit_midpoint };

std::string to_string(Integrator integrator);
Integrator integrator_from_string(const std::string& name);

/// Time-stepping parameters for dw/dt = b_N(w) (+ an optional constant
/// forcing, used only for negative controls).
struct FlowParams {
  int cutoff = 0;
  double dt = 1e-2;
  double horizon = 0.0;
  Integrator integrator = Integrator::implicit_midpoint;
  double midpoint_tol = 1e-12;
  int midpoint_max_iter = 50;
  std::optional<SpectralField> forcing;

  /// horizon / dt, rounded; validate() guarantees it is integral.
  int steps() const;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const FlowParams& p);

/// Midpoint fixed-point iteration did not converge.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;
};

using VectorFieldFn = std::function<SpectralField(const SpectralField&)>;

/// The right-hand side used by step(): b_N, plus the forcing if set.
/// direction = -1 gives the time-reversed field.
VectorFieldFn flow_vector_field(const FlowParams& p, double direction = 1.0);

/// One step of size p.dt. direction = -1 integrates dw/dt = -b_N(w).
SpectralField step(const SpectralField& omega, const FlowParams& p, double direction = 1.0);

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;
  double enstrophy = 0.0;
  double energy = 0.0;
  double ortho_residual = 0.0;  ///< <b_N(w), w>
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> fields;  ///< one per recorded time
  std::vector<StepDiagnostics> diagnostics;

  const SpectralField& final() const { return fields.back(); }
};

/// ||u||^2 with u = biot_savart(w).
double energy(const SpectralField& omega);
StepDiagnostics diagnose(const SpectralField& omega, int step, double t);

/// Forward trajectory on [0, T]; fields and diagnostics at every step.
Trajectory evolve(const SpectralField& omega0, const FlowParams& p);
/// Integrates dw/dt = -b_N(w) over [0, T]; times are reported as -t.
Trajectory evolve_backward(const SpectralField& omega, const FlowParams& p);

/// Final state only: Phi_T (direction +1) or Phi_T^{-1} (direction -1).
SpectralField flow_map(const SpectralField& omega0, const FlowParams& p, double direction = 1.0);

/// CSV `step,t,enstrophy,energy,ortho_residual`.
void write_csv(std::ostream& out, const Trajectory& trajectory);

/**
 * Central-difference divergence of a vector field on H_N in the real
 * coordinates {w(0)} u {Re w(n), Im w(n) : n canonical}:
 *   sum_i (v_i(w + h e_i) - v_i(w - h e_i)) / (2h).
 * Defaults to the drift b_N.
 */
double divergence_check(const SpectralField& omega, int cutoff, double h, const VectorFieldFn& field = {});

/// Observed order log2(|w_h - w_{h/2}| / |w_{h/2} - w_{h/4}|) of the final
/// state at horizon p.horizon.
double observed_order(const SpectralField& omega0, const FlowParams& p);

}  // namespace enstrophy
