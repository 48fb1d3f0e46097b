#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "enstrophy/cylinder.hpp"
#include "enstrophy/flow.hpp"
#include "enstrophy/stats.hpp"

namespace enstrophy {

struct MeasureSpec {
  int cutoff = 0;
  bool include_zero_mode = true;
  std::uint64_t seed = 0;
};

/**
 * Sample `index` of the projected white-noise measure: w(n) = (xi + i eta)/sqrt(2)
 * on the canonical half lattice, w(0) ~ N(0,1) if the zero mode is included.
 * Each mode draws from its own counter stream keyed by (seed, index, n), so a
 * sample at cutoff N is the projection of the same sample at any larger cutoff.
 */
SpectralField sample_mu_n(const MeasureSpec& spec, std::uint64_t index);

/// Density with respect to mu^N.
struct DensitySpec {
  enum class Kind { uniform, gaussian_tilt, truncated };

  Kind kind = Kind::uniform;
  /// gaussian_tilt: exp(<w, phi> - |phi|^2 / 2).
  std::optional<SpectralField> tilt;
  /// truncated: min(base, bound) / Z.
  std::shared_ptr<const DensitySpec> base;
  double bound = 0.0;
  std::optional<Estimate> normalization;

  static DensitySpec uniform();
  static DensitySpec gaussian_tilt(SpectralField phi);
  /// Z is left unset; call estimate_normalization before use.
  static DensitySpec truncated(DensitySpec base, double bound);
};

/// Throws std::invalid_argument for a truncated density without Z.
double density_value(const DensitySpec& d, const SpectralField& omega);

/// Returns a copy of a truncated density with Z = E[min(base, M)] estimated
/// from `samples` draws of mu^N (its standard error is kept alongside).
DensitySpec estimate_normalization(const DensitySpec& d, const MeasureSpec& spec, std::size_t samples);

/// Exact relative entropy int rho log rho dmu^N where it is known analytically.
std::optional<double> analytic_entropy(const DensitySpec& d);

struct Member {
  SpectralField field;
  double weight = 1.0;
  std::uint64_t stream_id = 0;
};

struct Ensemble {
  MeasureSpec spec;
  std::vector<Member> members;
  double time = 0.0;
};

Ensemble init_ensemble(const MeasureSpec& spec, const DensitySpec& d, std::size_t count);

/// Failure of one or more members during pushforward.
class PushforwardFailure : public std::runtime_error {
 public:
  PushforwardFailure(const std::string& what, std::vector<std::size_t> members)
      : std::runtime_error(what), members(std::move(members)) {}
  std::vector<std::size_t> members;
};

/// Moves every member along Phi_T; weights and stream ids are untouched.
Ensemble pushforward(const Ensemble& e, const FlowParams& p);

/// (1/M) sum w_i F(w_i).
Estimate weighted_mean(const Ensemble& e, const std::function<double(const SpectralField&)>& observable);

/// (1/M) sum w_i log w_i with 0 log 0 = 0.
Estimate entropy(const Ensemble& e);

struct TwoRouteResult {
  Estimate forward;   ///< (1/M) sum w_i F(Phi_T w_i)
  Estimate backward;  ///< (1/M') sum rho_0(Phi_{-T} v_j) F(v_j), fresh v_j
  bool consistent = false;
};

/// Both routes estimate int F d nu_T. `fresh_spec` must use a different seed.
TwoRouteResult two_route_check(const Ensemble& evolved, const MeasureSpec& fresh_spec, const DensitySpec& d,
                               std::size_t fresh_count, const FlowParams& p,
                               const std::function<double(const SpectralField&)>& observable);

/**
 * Per-member residual
 *   w_i [ int_0^T (dF/dt + <b_N, DF>)(t, w_i(t)) dt + F(0, w_i(0)) ]
 * with the trapezoidal rule on the integrator's time nodes. <b_N, phi_j> is
 * evaluated with the quadratic form of phi_j. Requires pi_N phi_j = phi_j.
 */
Estimate weak_form_residual(const Ensemble& e0, const CylinderFunctional& F, const FlowParams& p);

/// Per-member field CSVs `member_<i>.csv` plus manifest CSV
/// `member,stream_id,weight,t` in `dir`.
void write_snapshot(const Ensemble& e, const std::filesystem::path& dir);
Ensemble read_snapshot(const std::filesystem::path& dir, const MeasureSpec& spec);

}  // namespace enstrophy
