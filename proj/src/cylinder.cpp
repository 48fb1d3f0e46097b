#include "enstrophy/cylinder.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace enstrophy {

OuterKind outer_from_string(const std::string& name) {
  if (name == "constant") return OuterKind::constant;
  if (name == "sin") return OuterKind::sine;
  if (name == "cos") return OuterKind::cosine;
  if (name == "tanh") return OuterKind::tanh;
  throw std::invalid_argument("unknown outer function '" + name + "' (expected constant, sin, cos or tanh)");
}

TimeKind time_from_string(const std::string& name) {
  if (name == "linear_decay") return TimeKind::linear_decay;
  if (name == "cosine_decay") return TimeKind::cosine_decay;
  throw std::invalid_argument("unknown time factor '" + name + "' (expected linear_decay or cosine_decay)");
}

std::string to_string(OuterKind kind) {
  switch (kind) {
    case OuterKind::constant: return "constant";
    case OuterKind::sine: return "sin";
    case OuterKind::cosine: return "cos";
    case OuterKind::tanh: return "tanh";
  }
  return "?";
}

std::string to_string(TimeKind kind) { return kind == TimeKind::linear_decay ? "linear_decay" : "cosine_decay"; }

CylinderFunctional::CylinderFunctional(std::vector<SpectralField> tests, std::vector<CylinderTerm> terms,
                                       double horizon)
    : tests_(std::move(tests)), terms_(std::move(terms)), horizon_(horizon) {
  if (!(horizon_ > 0.0)) throw std::invalid_argument("cylinder: horizon must be positive");
  for (const auto& phi : tests_) validate(phi);
  for (const auto& term : terms_) {
    if (term.test_index < 0 || term.test_index >= static_cast<int>(tests_.size()))
      throw std::invalid_argument("cylinder: term refers to missing test function " + std::to_string(term.test_index));
    if (std::abs(g(term, horizon_)) > kExactTol) throw std::invalid_argument("cylinder: g(T) != 0");
  }
}

int CylinderFunctional::cutoff() const {
  int c = 0;
  for (const auto& phi : tests_) c = std::max(c, phi.cutoff());
  return c;
}

std::vector<double> CylinderFunctional::coordinates(const SpectralField& omega) const {
  std::vector<double> out;
  out.reserve(tests_.size());
  for (const auto& phi : tests_) out.push_back(dual_pairing(omega, phi));
  return out;
}

double CylinderFunctional::g(const CylinderTerm& term, double t) const {
  if (term.time == TimeKind::linear_decay) return (horizon_ - t) / horizon_;
  return std::cos(0.5 * std::numbers::pi * t / horizon_);
}

double CylinderFunctional::dg(const CylinderTerm& term, double t) const {
  if (term.time == TimeKind::linear_decay) return -1.0 / horizon_;
  const double k = 0.5 * std::numbers::pi / horizon_;
  return -k * std::sin(k * t);
}

double CylinderFunctional::f(OuterKind kind, double s) {
  switch (kind) {
    case OuterKind::constant: return 1.0;
    case OuterKind::sine: return std::sin(s);
    case OuterKind::cosine: return std::cos(s);
    case OuterKind::tanh: return std::tanh(s);
  }
  return 0.0;
}

double CylinderFunctional::df(OuterKind kind, double s) {
  switch (kind) {
    case OuterKind::constant: return 0.0;
    case OuterKind::sine: return std::cos(s);
    case OuterKind::cosine: return -std::sin(s);
    case OuterKind::tanh: {
      const double c = std::cosh(s);
      return 1.0 / (c * c);
    }
  }
  return 0.0;
}

double CylinderFunctional::value(double t, std::span<const double> coords) const {
  double acc = 0.0;
  for (const auto& term : terms_) acc += term.amplitude * f(term.outer, coords[term.test_index]) * g(term, t);
  return acc;
}

double CylinderFunctional::time_derivative(double t, std::span<const double> coords) const {
  double acc = 0.0;
  for (const auto& term : terms_) acc += term.amplitude * f(term.outer, coords[term.test_index]) * dg(term, t);
  return acc;
}

std::vector<double> CylinderFunctional::gradient(double t, std::span<const double> coords) const {
  std::vector<double> out(tests_.size(), 0.0);
  for (const auto& term : terms_)
    out[term.test_index] += term.amplitude * df(term.outer, coords[term.test_index]) * g(term, t);
  return out;
}

}  // namespace enstrophy
