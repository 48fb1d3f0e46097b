#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "enstrophy/mode.hpp"

namespace enstrophy {

using Complex = std::complex<double>;

/**
 * Real scalar field on the unit torus [0,1)^2 stored by its Fourier
 * coefficients on the square lattice {|n|_inf <= N}.
 *
 * Storage is the full lattice in lexicographic (n1, n2) order. The reality
 * constraint c(-n) = conj(c(n)) is maintained by the writers: set_mode()
 * writes a mode together with its mirror, and set_mean() writes the real
 * zero mode. Coefficients outside the lattice read as zero.
 */
class SpectralField {
 public:
  explicit SpectralField(int cutoff = 0);

  /// Builds a field from a full-lattice coefficient table (lexicographic
  /// order); throws InvariantViolation when the table is not Hermitian
  /// within kHardFailTol.
  static SpectralField from_coefficients(int cutoff, std::vector<Complex> coeffs);

  /// Fills every canonical half-lattice mode (and the zero mode) from a
  /// generator; the mirror modes are written as conjugates.
  static SpectralField from_generator(int cutoff, const std::function<Complex(ModeIndex)>& gen);

  int cutoff() const { return cutoff_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const Complex> coefficients() const { return coeffs_; }

  bool contains(ModeIndex n) const { return n.sup_norm() <= cutoff_; }
  Complex operator[](ModeIndex n) const { return contains(n) ? coeffs_[index(n)] : Complex{}; }

  /// Lexicographic mode for a storage index.
  ModeIndex mode(std::size_t i) const {
    const int side = 2 * cutoff_ + 1;
    return {static_cast<int>(i) / side - cutoff_, static_cast<int>(i) % side - cutoff_};
  }
  std::size_t index(ModeIndex n) const {
    const int side = 2 * cutoff_ + 1;
    return static_cast<std::size_t>((n.n1 + cutoff_) * side + (n.n2 + cutoff_));
  }

  /// Writes c(n) = value and c(-n) = conj(value). For n = 0 the imaginary
  /// part must vanish.
  void set_mode(ModeIndex n, Complex value);
  void set_mean(double value);

  /// Largest |c(-n) - conj(c(n))| over the lattice.
  double reality_residual() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double a);
  /// this += a * x; x may have a different cutoff (extra modes dropped).
  SpectralField& axpy(double a, const SpectralField& x);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double a, SpectralField x) { return x *= a; }
  friend SpectralField operator-(SpectralField x) { return x *= -1.0; }

  bool operator==(const SpectralField&) const = default;

 private:
  int cutoff_;
  std::vector<Complex> coeffs_;
};

/// Throws InvariantViolation unless the reality constraint holds within tol.
void validate(const SpectralField& field, double tol = kHardFailTol);

/// Orthogonal projection onto {|n|_inf <= N}; the result has cutoff N.
SpectralField project(const SpectralField& field, int cutoff);

/// (sum (1 + |n|^2)^s |c(n)|^2)^(1/2)
double sobolev_norm(const SpectralField& field, double s);

/// Sum of |c(n)|^2, i.e. the squared L2 norm (enstrophy of a vorticity field).
double l2_norm_squared(const SpectralField& field);

/// Dirichlet kernel: every coefficient on the lattice equals 1.
SpectralField dirichlet_kernel(int cutoff);

/// Closed-form point value of the Dirichlet kernel as the product
/// D_N(x1) D_N(x2) with D_N(t) = 1 + 2 sum_k cos(2 pi k t). The product form
/// is exactly symmetric under x1 <-> x2 and x -> -x in floating point.
double dirichlet_kernel_value(int cutoff, double x1, double x2);

/// L2 pairing sum_n c(n) conj(d(n)) over the common modes. Throws
/// InvariantViolation if the imaginary residual exceeds kHardFailTol times
/// the magnitude of the summands.
double dual_pairing(const SpectralField& a, const SpectralField& b);

/// Direct evaluation of the trigonometric polynomial at a point.
double evaluate(const SpectralField& field, double x1, double x2);

/// Gradient (d/dx1, d/dx2) of the field as two spectral fields.
std::pair<SpectralField, SpectralField> gradient(const SpectralField& field);

/// Real samples on the uniform grid {((a + shift)/G, (b + shift)/G)};
/// values are stored row-major with a indexing x1.
struct GridField {
  int size = 0;
  double shift = 0.0;
  std::vector<double> values;

  double& operator()(int a, int b) { return values[static_cast<std::size_t>(a) * size + b]; }
  double operator()(int a, int b) const { return values[static_cast<std::size_t>(a) * size + b]; }
  double node(int a) const { return (a + shift) / size; }
};

/// Exact evaluation of the field on a G x G grid. Any G >= 1 is accepted;
/// modes are folded modulo G, which evaluates the polynomial exactly at the
/// nodes even when G < 2N + 1.
GridField to_grid(const SpectralField& field, int grid_size, double shift = 0.0);

/// Discrete Fourier analysis of a grid. Requires G >= 2N + 1 (throws
/// std::invalid_argument otherwise, aliasing would corrupt the result).
SpectralField from_grid(const GridField& grid, int cutoff);

/// Snapshot I/O: CSV `n1,n2,re,im`, one row per lattice mode in
/// lexicographic order. The reader validates the reality constraint.
void write_csv(std::ostream& out, const SpectralField& field);
SpectralField read_csv(std::istream& in);

}  // namespace enstrophy
