#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "enstrophy/dynamics.hpp"

namespace enstrophy {

/// Smooth bounded outer function of one real variable.
enum class OuterKind { constant, sine, cosine, tanh };
/// Time factor vanishing at the horizon.
enum class TimeKind { linear_decay, cosine_decay };

OuterKind outer_from_string(const std::string& name);
TimeKind time_from_string(const std::string& name);
std::string to_string(OuterKind kind);
std::string to_string(TimeKind kind);

/// One term f(<w, phi_j>) g(t); `amplitude` scales f.
struct CylinderTerm {
  int test_index = 0;
  OuterKind outer = OuterKind::sine;
  TimeKind time = TimeKind::linear_decay;
  double amplitude = 1.0;
};

/**
 * F(t, w) = sum_i a_i f_i(<w, phi_{j(i)}>) g_i(t). Every g_i satisfies
 * g_i(T) = 0 by construction; the constructor re-checks it numerically.
 */
class CylinderFunctional {
 public:
  CylinderFunctional(std::vector<SpectralField> tests, std::vector<CylinderTerm> terms, double horizon);

  const std::vector<SpectralField>& tests() const { return tests_; }
  const std::vector<CylinderTerm>& terms() const { return terms_; }
  double horizon() const { return horizon_; }
  /// Largest test-function cutoff.
  int cutoff() const;

  /// Pairings <w, phi_j> for all tests.
  std::vector<double> coordinates(const SpectralField& omega) const;

  double value(double t, std::span<const double> coords) const;
  double time_derivative(double t, std::span<const double> coords) const;
  /// dF/d<w, phi_j>, so that <v, DF> = sum_j grad_j <v, phi_j>.
  std::vector<double> gradient(double t, std::span<const double> coords) const;

  double g(const CylinderTerm& term, double t) const;
  double dg(const CylinderTerm& term, double t) const;
  static double f(OuterKind kind, double s);
  static double df(OuterKind kind, double s);

 private:
  std::vector<SpectralField> tests_;
  std::vector<CylinderTerm> terms_;
  double horizon_;
};

}  // namespace enstrophy
