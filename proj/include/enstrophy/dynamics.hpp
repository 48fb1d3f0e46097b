#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "enstrophy/spectral_field.hpp"

namespace enstrophy {

// ---------------------------------------------------------------------------
// Biot-Savart law and the truncated Euler drift
// ---------------------------------------------------------------------------

/// Divergence-free velocity, one spectral field per component.
struct VelocityField {
  SpectralField u1;
  SpectralField u2;

  int cutoff() const { return u1.cutoff(); }
};

/// u(n) = w(n) perp(n) / (2 pi i |n|^2) for n != 0, u(0) = 0.
VelocityField biot_savart(const SpectralField& vorticity);

/// d2 u1 - d1 u2, coefficientwise.
SpectralField curl(const VelocityField& u);
/// d1 u1 + d2 u2, coefficientwise.
SpectralField divergence(const VelocityField& u);

/// Throws InvariantViolation unless both components are real, the zero mode
/// vanishes and n.u(n) = 0 within kExactTol.
void validate(const VelocityField& u);

enum class DriftStrategy { direct, dealiased };

/// Grid size used by the dealiased product: smallest power of two >= 3N+2.
int dealiased_grid_size(int cutoff);

/**
 * b_N(w) = -pi_N(u(pi_N w) . grad pi_N w).
 *
 * The direct strategy sums the exact convolution
 *   b(k) = -sum_{m+j=k} (perp(m).j)/|m|^2 w(m) w(j)
 * over m, j in the lattice without the zero mode. The dealiased strategy
 * forms the product pseudo-spectrally on a zero-padded grid and projects.
 */
SpectralField drift(const SpectralField& vorticity, int cutoff, DriftStrategy strategy = DriftStrategy::dealiased);

// ---------------------------------------------------------------------------
// Quadratic pairings <w (x) w, f> with coefficient kernels
// ---------------------------------------------------------------------------

struct KernelEntry {
  ModeIndex n;
  ModeIndex m;
  Complex value;
};

/**
 * Sparse coefficient table A(n, m) of a symmetric real kernel f(x, y), such
 * that <w (x) w, f> = sum_{n,m} w(n) w(m) A(n, m). Entries are kept sorted by
 * (n, m); absent pairs are zero.
 */
class CoefficientKernel {
 public:
  CoefficientKernel() = default;
  CoefficientKernel(int cutoff, std::vector<KernelEntry> entries);

  int cutoff() const { return cutoff_; }
  std::span<const KernelEntry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  Complex at(ModeIndex n, ModeIndex m) const;

  /// sum w(n) w(m) A(n,m); throws InvariantViolation on an imaginary
  /// residual above kHardFailTol relative to the summand scale. Modes of w
  /// beyond the kernel's support simply do not contribute.
  double pairing(const SpectralField& omega) const;
  Complex pairing_complex(const SpectralField& omega) const;

  /// sum_n A(n, -n): the Gaussian mean of the pairing (diagonal integral).
  double trace() const;
  /// sum |A(n,m)|^2 = ||f||^2 in L2 of the doubled torus.
  double hilbert_schmidt_squared() const;
  /// sum |A(n,m)|, an upper bound for ||f||_inf.
  double sup_bound() const;

  /// Entries with both modes inside {|n|_inf <= cutoff}.
  CoefficientKernel restricted(int cutoff) const;
  /// Entries with at least one mode outside {|n|_inf <= inner}.
  CoefficientKernel outside(int inner) const;
  CoefficientKernel scaled(double factor) const;

 private:
  int cutoff_ = 0;
  std::vector<KernelEntry> entries_;
};

/// Symmetry A(n,m) = A(m,n) and conjugation A(-n,-m) = conj A(n,m).
void validate(const CoefficientKernel& kernel, double tol = kExactTol);

/// f(x,y) = (a(x) b(y) + b(x) a(y)) / 2.
CoefficientKernel separable_kernel(const SpectralField& a, const SpectralField& b);
/// f(x,y) = c(x - y) for an even real field c.
CoefficientKernel translation_kernel(const SpectralField& c);

/// Coefficient realization of the symmetrized drift kernel H_phi restricted
/// to modes |n|_inf <= cutoff.
struct QuadraticForm {
  SpectralField phi;
  int cutoff = 0;
  CoefficientKernel kernel;
};

/// A(n,m) = (1/2) (perp(m).n) (1/|n|^2 - 1/|m|^2) phi(-n-m) for n, m != 0.
QuadraticForm quadratic_coefficients(const SpectralField& phi, int cutoff);

/// Kernel invariants plus zero rows at n = 0 or m = 0 and zero entries on
/// |n| = |m|.
void validate(const QuadraticForm& form, double tol = kExactTol);

/// <(pi_N w) (x) (pi_N w), H_phi>, equal to <b_N(w), phi> when pi_N phi = phi.
double pairing_b_phi(const SpectralField& omega, const QuadraticForm& form);

/// CSV `n1,n2,m1,m2,re,im`, nonzero entries only.
void write_csv(std::ostream& out, const QuadraticForm& form);

// ---------------------------------------------------------------------------
// Real-space kernel H_phi(x,y) = K(x-y) . (grad phi(x) - grad phi(y)) / 2
// ---------------------------------------------------------------------------

/// Spectral window applied to the Fourier-summed Biot-Savart kernel.
/// sharp:    K(z) = sum_{0<|n|_inf<=K} perp(n)/(2 pi i |n|^2) e_n(z)
/// gaussian: same sum damped by exp(-2 pi^2 eps^2 |n|^2), eps = 3/(pi K);
///           this equals K smoothed by a Gaussian of width eps, which is the
///           exact torus kernel up to exp(-|z|^2 / (2 eps^2)) for |z| >> eps.
enum class KernelWindow { sharp, gaussian };

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct SymmetricMatrix2 {
  double s11 = 0.0;
  double s12 = 0.0;
  double s22 = 0.0;
};

struct KernelValue {
  double value = 0.0;
  /// |value(K) - value(2K)|: empirical truncation estimate of the kernel sum.
  double truncation = 0.0;
};

class KernelEval {
 public:
  explicit KernelEval(SpectralField phi, int kmax = 64, KernelWindow window = KernelWindow::sharp);

  const SpectralField& phi() const { return phi_; }
  int kmax() const { return kmax_; }
  KernelWindow window() const { return window_; }
  /// Below this separation the windowed sum does not resolve K.
  double resolved_radius() const;

  /// Truncated K(z); `refined` selects the 2K sum used for error estimates.
  std::array<double, 2> velocity_kernel(Point z, bool refined = false) const;
  /// K components as spectral fields (cutoff K, or 2K when refined).
  const VelocityField& kernel_fields(bool refined = false) const { return refined ? fine_ : coarse_; }

  /// grad phi and the Hessian (phi_11, phi_12, phi_22) at a point.
  std::array<double, 2> grad_phi(Point x) const;
  SymmetricMatrix2 hessian_phi(Point x) const;

 private:
  SpectralField phi_;
  int kmax_;
  KernelWindow window_;
  VelocityField coarse_;
  VelocityField fine_;
  SpectralField phi_1_, phi_2_, phi_11_, phi_12_, phi_22_;
};

/// Minimal-image torus difference x - y with components in [-1/2, 1/2).
Point torus_difference(Point x, Point y);

/// H_phi(x, y); throws std::invalid_argument on the diagonal x = y.
KernelValue hphi_realspace(const KernelEval& ke, Point x, Point y);

/// Singular part (1/(4 pi)) <D^2 phi(x) z/|z|, perp(z)/|z|> with z = x - y.
double hphi_leading_term(const KernelEval& ke, Point x, Point y);

/// R_phi = H_phi - leading term.
double hphi_remainder(const KernelEval& ke, Point x, Point y);

struct LipschitzFit {
  double constant = 0.0;       ///< max |R| / |x - y| over the sample
  double worst_separation = 0.0;
  std::size_t pairs = 0;
};

/// Fits |R_phi(x,y)| <= C |x-y| over `count` pseudo-random pairs with
/// separations in [r_min, r_max]; deterministic for a fixed seed.
LipschitzFit fit_remainder_constant(const KernelEval& ke, double r_min, double r_max, std::size_t count,
                                    std::uint64_t seed);

/// max |H_phi(x,y)| with x on the G-grid and y on the half-shifted G-grid.
double hphi_sup_on_grid(const KernelEval& ke, int grid_size);

struct QuadratureEstimate {
  double value = 0.0;
  double error = 0.0;
};

/**
 * Midpoint rule for int W(x) <S x/|x|, perp(x)/|x|> dx over [-1/2,1/2)^2
 * on nodes (2a + 1 - G)/(2G), which are symmetric about the origin and never
 * hit it. G must be even.
 */
double symmetry_integral(const SpectralField& kernel, SymmetricMatrix2 s, int grid_size);

/**
 * int int W_N(x - y) H_phi(x, y) dx dy with W_N = theta_N. x runs over the
 * G-grid and x - y over the half-shifted grid, so the diagonal is never
 * sampled. The error combines the change against a (G+2)-grid with a
 * rounding floor. Requires G >= 4N + 4.
 */
QuadratureEstimate trace_integral(const KernelEval& ke, int cutoff, int grid_size);

/// Grid size for which trace_integral integrates the truncated integrand
/// exactly: the smallest even G >= max(4N + 4, K + N + N_phi + 1).
int exact_trace_grid_size(const KernelEval& ke, int cutoff);

}  // namespace enstrophy
