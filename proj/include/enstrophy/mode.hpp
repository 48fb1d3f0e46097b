#pragma once

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace enstrophy {

/// Thrown when a documented invariant of a value is broken (reality,
/// symmetry, imaginary residuals above the hard-failure threshold, ...).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerance ladder shared by all modules.
inline constexpr double kExactTol = 1e-12;
inline constexpr double kHardFailTol = 1e-9;

/// Integer wavevector n = (n1, n2) of the Fourier mode e_n(x) = exp(2 pi i n.x).
struct ModeIndex {
  int n1 = 0;
  int n2 = 0;

  constexpr auto operator<=>(const ModeIndex&) const = default;

  constexpr ModeIndex operator-() const { return {-n1, -n2}; }
  constexpr ModeIndex operator+(ModeIndex o) const { return {n1 + o.n1, n2 + o.n2}; }
  constexpr ModeIndex operator-(ModeIndex o) const { return {n1 - o.n1, n2 - o.n2}; }

  constexpr int sup_norm() const { return std::max(n1 < 0 ? -n1 : n1, n2 < 0 ? -n2 : n2); }
  constexpr int norm2() const { return n1 * n1 + n2 * n2; }
  constexpr bool is_zero() const { return n1 == 0 && n2 == 0; }

  /// perp(n) = (n2, -n1); fixed convention for the whole project.
  constexpr ModeIndex perp() const { return {n2, -n1}; }

  /// Canonical half lattice: n1 > 0, or n1 == 0 and n2 > 0.
  constexpr bool is_canonical() const { return n1 > 0 || (n1 == 0 && n2 > 0); }

  std::string str() const { return "(" + std::to_string(n1) + "," + std::to_string(n2) + ")"; }
};

constexpr int dot(ModeIndex a, ModeIndex b) { return a.n1 * b.n1 + a.n2 * b.n2; }

/// Number of modes in the square lattice {|n|_inf <= N}.
constexpr std::size_t lattice_size(int cutoff) {
  const auto side = static_cast<std::size_t>(2 * cutoff + 1);
  return side * side;
}

}  // namespace enstrophy
