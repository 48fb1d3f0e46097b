#include "enstrophy/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "enstrophy/rng.hpp"
#include "fft.hpp"

namespace enstrophy {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
const Complex kTwoPiI{0.0, kTwoPi};

int wrap(int k, int g) {
  const int r = k % g;
  return r < 0 ? r + g : r;
}

// Effective cutoff: largest |n|_inf carrying a nonzero coefficient.
int support_cutoff(const SpectralField& f) {
  int c = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.coefficients()[i] != Complex{}) c = std::max(c, f.mode(i).sup_norm());
  return c;
}

SpectralField direct_drift(const SpectralField& w, int n) {
  const int side = 2 * n + 1;
  std::vector<double> inv_norm2(lattice_size(n), 0.0);
  for (int m1 = -n; m1 <= n; ++m1)
    for (int m2 = -n; m2 <= n; ++m2)
      if (m1 != 0 || m2 != 0) inv_norm2[(m1 + n) * side + (m2 + n)] = 1.0 / (m1 * m1 + m2 * m2);

  auto coeff = [&](int a, int b) { return w[{a, b}]; };
  auto term_sum = [&](ModeIndex k) {
    Complex acc{};
    for (int m1 = std::max(-n, k.n1 - n); m1 <= std::min(n, k.n1 + n); ++m1)
      for (int m2 = std::max(-n, k.n2 - n); m2 <= std::min(n, k.n2 + n); ++m2) {
        const ModeIndex m{m1, m2};
        const ModeIndex j = k - m;
        if (m.is_zero() || j.is_zero()) continue;
        const int cross = dot(m.perp(), j);
        if (cross == 0) continue;
        acc += (cross * inv_norm2[(m1 + n) * side + (m2 + n)]) * (coeff(m1, m2) * coeff(j.n1, j.n2));
      }
    return -acc;
  };

  SpectralField out(n);
  out.set_mean(term_sum({0, 0}).real());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex k = out.mode(i);
    if (k.is_canonical()) out.set_mode(k, term_sum(k));
  }
  return out;
}

struct DealiasWorkspace {
  int grid = 0;
  std::vector<Complex> spec_u1, spec_u2, spec_d1, spec_d2, spec_out;
  std::vector<double> u1, u2, d1, d2, product;

  void resize(int g) {
    if (g == grid) return;
    grid = g;
    const auto half = static_cast<std::size_t>(g) * (g / 2 + 1);
    const auto cells = static_cast<std::size_t>(g) * g;
    for (auto* v : {&spec_u1, &spec_u2, &spec_d1, &spec_d2, &spec_out}) v->assign(half, Complex{});
    for (auto* v : {&u1, &u2, &d1, &d2, &product}) v->assign(cells, 0.0);
  }
};

SpectralField dealiased_drift(const SpectralField& w, int n) {
  if (n == 0) return SpectralField(0);
  thread_local DealiasWorkspace ws;
  const int g = dealiased_grid_size(n);
  ws.resize(g);
  const int half = g / 2 + 1;
  for (auto* v : {&ws.spec_u1, &ws.spec_u2, &ws.spec_d1, &ws.spec_d2}) std::fill(v->begin(), v->end(), Complex{});

  const auto coeffs = w.coefficients();
  const int side = 2 * n + 1;
  for (int n1 = -n; n1 <= n; ++n1) {
    const std::size_t row = static_cast<std::size_t>(wrap(n1, g)) * half;
    const Complex* src = coeffs.data() + static_cast<std::size_t>(n1 + n) * side + n;
    for (int n2 = (n1 == 0 ? 1 : 0); n2 <= n; ++n2) {
      const Complex c = src[n2];
      const double inv = 1.0 / (kTwoPi * (n1 * n1 + n2 * n2));
      // c / (2 pi i |n|^2) = -i c inv
      const Complex s{c.imag() * inv, -c.real() * inv};
      ws.spec_u1[row + n2] = s * static_cast<double>(n2);
      ws.spec_u2[row + n2] = s * static_cast<double>(-n1);
      ws.spec_d1[row + n2] = kTwoPiI * static_cast<double>(n1) * c;
      ws.spec_d2[row + n2] = kTwoPiI * static_cast<double>(n2) * c;
    }
  }
  detail::synthesize_real_2d(ws.spec_u1, ws.u1, g);
  detail::synthesize_real_2d(ws.spec_u2, ws.u2, g);
  detail::synthesize_real_2d(ws.spec_d1, ws.d1, g);
  detail::synthesize_real_2d(ws.spec_d2, ws.d2, g);
  for (std::size_t i = 0; i < ws.product.size(); ++i) ws.product[i] = ws.u1[i] * ws.d1[i] + ws.u2[i] * ws.d2[i];
  detail::analyze_real_2d(ws.product, ws.spec_out, g);

  const double norm = -1.0 / (static_cast<double>(g) * g);
  auto read = [&](ModeIndex k) {
    if (k.n2 >= 0) return ws.spec_out[static_cast<std::size_t>(wrap(k.n1, g)) * half + k.n2] * norm;
    return std::conj(ws.spec_out[static_cast<std::size_t>(wrap(-k.n1, g)) * half + (-k.n2)]) * norm;
  };
  SpectralField out(n);
  out.set_mean(read({0, 0}).real());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex k = out.mode(i);
    if (k.is_canonical()) out.set_mode(k, read(k));
  }
  return out;
}

bool entry_less(const KernelEntry& a, const KernelEntry& b) {
  return std::tie(a.n, a.m) < std::tie(b.n, b.m);
}

}  // namespace

// ---------------------------------------------------------------------------

namespace {

// Rounds x to 53 - drop significant bits, so that products with integers of
// at most `drop` bits in total are exact.
double shorten_mantissa(double x, int drop) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  int e = 0;
  const double m = std::frexp(x, &e);
  const int bits = 53 - drop;
  return std::ldexp(std::nearbyint(std::ldexp(m, bits)), e - bits);
}

}  // namespace

VelocityField biot_savart(const SpectralField& vorticity) {
  const int n = vorticity.cutoff();
  VelocityField u{SpectralField(n), SpectralField(n)};
  for (std::size_t i = 0; i < vorticity.size(); ++i) {
    const ModeIndex k = vorticity.mode(i);
    if (!k.is_canonical()) continue;
    // The common factor is shortened so that n1 * u1 + n2 * u2 cancels
    // bitwise: both products n1 n2 scale are then exact.
    const int drop = std::bit_width(static_cast<unsigned>(std::abs(k.n1))) +
                     std::bit_width(static_cast<unsigned>(std::abs(k.n2)));
    Complex scale = vorticity.coefficients()[i] / (kTwoPiI * static_cast<double>(k.norm2()));
    scale = {shorten_mantissa(scale.real(), drop), shorten_mantissa(scale.imag(), drop)};
    const ModeIndex p = k.perp();
    u.u1.set_mode(k, scale * static_cast<double>(p.n1));
    u.u2.set_mode(k, scale * static_cast<double>(p.n2));
  }
  return u;
}

SpectralField curl(const VelocityField& u) {
  SpectralField out(u.cutoff());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex k = out.mode(i);
    if (!k.is_canonical()) continue;
    out.set_mode(k, kTwoPiI * (static_cast<double>(k.n2) * u.u1[k] - static_cast<double>(k.n1) * u.u2[k]));
  }
  return out;
}

SpectralField divergence(const VelocityField& u) {
  SpectralField out(u.cutoff());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex k = out.mode(i);
    if (!k.is_canonical()) continue;
    out.set_mode(k, kTwoPiI * (static_cast<double>(k.n1) * u.u1[k] + static_cast<double>(k.n2) * u.u2[k]));
  }
  return out;
}

void validate(const VelocityField& u) {
  validate(u.u1);
  validate(u.u2);
  if (std::abs(u.u1[{0, 0}]) > 0.0 || std::abs(u.u2[{0, 0}]) > 0.0)
    throw InvariantViolation("velocity: zero mode must vanish");
  for (std::size_t i = 0; i < u.u1.size(); ++i) {
    const ModeIndex k = u.u1.mode(i);
    const double flux = std::abs(static_cast<double>(k.n1) * u.u1[k] + static_cast<double>(k.n2) * u.u2[k]);
    if (flux > kExactTol) throw InvariantViolation("velocity: n.u(n) != 0 at " + k.str());
  }
}

int dealiased_grid_size(int cutoff) {
  int g = 2;
  while (g < 3 * cutoff + 2) g *= 2;
  return g;
}

SpectralField drift(const SpectralField& vorticity, int cutoff, DriftStrategy strategy) {
  const SpectralField w = vorticity.cutoff() == cutoff ? vorticity : project(vorticity, cutoff);
  return strategy == DriftStrategy::direct ? direct_drift(w, cutoff) : dealiased_drift(w, cutoff);
}

// ---------------------------------------------------------------------------

CoefficientKernel::CoefficientKernel(int cutoff, std::vector<KernelEntry> entries)
    : cutoff_(cutoff), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), entry_less);
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].n == entries_[i - 1].n && entries_[i].m == entries_[i - 1].m)
      throw std::invalid_argument("CoefficientKernel: duplicate entry " + entries_[i].n.str() + entries_[i].m.str());
}

Complex CoefficientKernel::at(ModeIndex n, ModeIndex m) const {
  const KernelEntry probe{n, m, {}};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, entry_less);
  if (it != entries_.end() && it->n == n && it->m == m) return it->value;
  return {};
}

Complex CoefficientKernel::pairing_complex(const SpectralField& omega) const {
  Complex acc{};
  for (const auto& e : entries_) acc += omega[e.n] * omega[e.m] * e.value;
  return acc;
}

double CoefficientKernel::pairing(const SpectralField& omega) const {
  Complex acc{};
  double scale = 0.0;
  for (const auto& e : entries_) {
    const Complex t = omega[e.n] * omega[e.m] * e.value;
    acc += t;
    scale += std::abs(t);
  }
  if (std::abs(acc.imag()) > kHardFailTol * std::max(1.0, scale)) {
    std::ostringstream msg;
    msg << "quadratic pairing: imaginary residual " << acc.imag();
    throw InvariantViolation(msg.str());
  }
  return acc.real();
}

double CoefficientKernel::trace() const {
  Complex acc{};
  for (const auto& e : entries_)
    if (e.m == -e.n) acc += e.value;
  return acc.real();
}

double CoefficientKernel::hilbert_schmidt_squared() const {
  double acc = 0.0;
  for (const auto& e : entries_) acc += std::norm(e.value);
  return acc;
}

double CoefficientKernel::sup_bound() const {
  double acc = 0.0;
  for (const auto& e : entries_) acc += std::abs(e.value);
  return acc;
}

CoefficientKernel CoefficientKernel::restricted(int cutoff) const {
  std::vector<KernelEntry> kept;
  for (const auto& e : entries_)
    if (e.n.sup_norm() <= cutoff && e.m.sup_norm() <= cutoff) kept.push_back(e);
  return {std::min(cutoff, cutoff_), std::move(kept)};
}

CoefficientKernel CoefficientKernel::outside(int inner) const {
  std::vector<KernelEntry> kept;
  for (const auto& e : entries_)
    if (e.n.sup_norm() > inner || e.m.sup_norm() > inner) kept.push_back(e);
  return {cutoff_, std::move(kept)};
}

CoefficientKernel CoefficientKernel::scaled(double factor) const {
  std::vector<KernelEntry> out(entries_.begin(), entries_.end());
  for (auto& e : out) e.value *= factor;
  return {cutoff_, std::move(out)};
}

void validate(const CoefficientKernel& kernel, double tol) {
  for (const auto& e : kernel.entries()) {
    if (std::abs(kernel.at(e.m, e.n) - e.value) > tol)
      throw InvariantViolation("kernel: A(n,m) != A(m,n) at " + e.n.str() + e.m.str());
    if (std::abs(kernel.at(-e.n, -e.m) - std::conj(e.value)) > tol)
      throw InvariantViolation("kernel: A(-n,-m) != conj A(n,m) at " + e.n.str() + e.m.str());
  }
}

CoefficientKernel separable_kernel(const SpectralField& a, const SpectralField& b) {
  // <w(x)w, f> = sum w(n) w(m) fhat(-n,-m) and fhat(p,q) = (a(p) b(q) + b(p) a(q)) / 2.
  const int cutoff = std::max(a.cutoff(), b.cutoff());
  std::vector<KernelEntry> entries;
  const SpectralField shape(cutoff);
  for (std::size_t i = 0; i < shape.size(); ++i)
    for (std::size_t j = 0; j < shape.size(); ++j) {
      const ModeIndex n = shape.mode(i), m = shape.mode(j);
      const Complex v = 0.5 * (a[-n] * b[-m] + b[-n] * a[-m]);
      if (v != Complex{}) entries.push_back({n, m, v});
    }
  return {cutoff, std::move(entries)};
}

CoefficientKernel translation_kernel(const SpectralField& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const ModeIndex n = c.mode(i);
    if (std::abs(c[n] - c[-n]) > kExactTol) throw std::invalid_argument("translation_kernel: profile must be even");
  }
  // f(x,y) = sum c(p) e_p(x) e_{-p}(y), so A(n,-n) = c(-n).
  std::vector<KernelEntry> entries;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const ModeIndex n = c.mode(i);
    if (c[-n] != Complex{}) entries.push_back({n, -n, c[-n]});
  }
  return {c.cutoff(), std::move(entries)};
}

QuadraticForm quadratic_coefficients(const SpectralField& phi, int cutoff) {
  std::vector<ModeIndex> support;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const ModeIndex p = phi.mode(i);
    if (!p.is_zero() && p.sup_norm() <= 2 * cutoff && phi.coefficients()[i] != Complex{}) support.push_back(p);
  }
  std::vector<KernelEntry> entries;
  for (int n1 = -cutoff; n1 <= cutoff; ++n1)
    for (int n2 = -cutoff; n2 <= cutoff; ++n2) {
      const ModeIndex n{n1, n2};
      if (n.is_zero()) continue;
      for (const ModeIndex p : support) {
        const ModeIndex m = -n - p;  // phi(-n-m) = phi(p)
        if (m.is_zero() || m.sup_norm() > cutoff || m.norm2() == n.norm2()) continue;
        const int cross = dot(m.perp(), n);
        if (cross == 0) continue;
        const double factor = 0.5 * cross * (1.0 / n.norm2() - 1.0 / m.norm2());
        entries.push_back({n, m, factor * phi[p]});
      }
    }
  return {phi, cutoff, CoefficientKernel(cutoff, std::move(entries))};
}

void validate(const QuadraticForm& form, double tol) {
  validate(form.kernel, tol);
  for (const auto& e : form.kernel.entries()) {
    if (e.n.is_zero() || e.m.is_zero()) throw InvariantViolation("quadratic form: nonzero entry on a zero mode");
    if (e.n.norm2() == e.m.norm2() && std::abs(e.value) > tol)
      throw InvariantViolation("quadratic form: nonzero entry with |n| = |m| at " + e.n.str() + e.m.str());
    if (e.n.sup_norm() > form.cutoff || e.m.sup_norm() > form.cutoff)
      throw InvariantViolation("quadratic form: entry outside the cutoff");
  }
}

double pairing_b_phi(const SpectralField& omega, const QuadraticForm& form) { return form.kernel.pairing(omega); }

void write_csv(std::ostream& out, const QuadraticForm& form) {
  out << "n1,n2,m1,m2,re,im\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& e : form.kernel.entries()) {
    if (e.value == Complex{}) continue;
    row.str("");
    row << e.n.n1 << ',' << e.n.n2 << ',' << e.m.n1 << ',' << e.m.n2 << ',' << e.value.real() << ','
        << e.value.imag() << '\n';
    out << row.str();
  }
}

// ---------------------------------------------------------------------------

namespace {

VelocityField windowed_kernel(int cutoff, KernelWindow window, double eps) {
  VelocityField k{SpectralField(cutoff), SpectralField(cutoff)};
  for (std::size_t i = 0; i < k.u1.size(); ++i) {
    const ModeIndex n = k.u1.mode(i);
    if (!n.is_canonical()) continue;
    double w = 1.0;
    if (window == KernelWindow::gaussian) w = std::exp(-2.0 * kPi * kPi * eps * eps * n.norm2());
    const Complex scale = w / (kTwoPiI * static_cast<double>(n.norm2()));
    const ModeIndex p = n.perp();
    k.u1.set_mode(n, scale * static_cast<double>(p.n1));
    k.u2.set_mode(n, scale * static_cast<double>(p.n2));
  }
  return k;
}

SpectralField derivative(const SpectralField& f, int a1, int a2) {
  // (d/dx1)^a1 (d/dx2)^a2
  SpectralField out(f.cutoff());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const ModeIndex n = f.mode(i);
    if (!n.is_canonical()) continue;
    Complex c = f.coefficients()[i];
    for (int r = 0; r < a1; ++r) c *= kTwoPiI * static_cast<double>(n.n1);
    for (int r = 0; r < a2; ++r) c *= kTwoPiI * static_cast<double>(n.n2);
    out.set_mode(n, c);
  }
  return out;
}

double gaussian_width(int kmax) { return 3.0 / (kPi * kmax); }

}  // namespace

KernelEval::KernelEval(SpectralField phi, int kmax, KernelWindow window)
    : phi_(std::move(phi)),
      kmax_(kmax),
      window_(window),
      coarse_(windowed_kernel(kmax, window, gaussian_width(kmax))),
      fine_(windowed_kernel(2 * kmax, window, gaussian_width(kmax))),
      phi_1_(derivative(phi_, 1, 0)),
      phi_2_(derivative(phi_, 0, 1)),
      phi_11_(derivative(phi_, 2, 0)),
      phi_12_(derivative(phi_, 1, 1)),
      phi_22_(derivative(phi_, 0, 2)) {
  if (kmax < 1) throw std::invalid_argument("KernelEval: kmax must be >= 1");
  validate(phi_);
}

double KernelEval::resolved_radius() const {
  // Gaussian: the smoothing tail exp(-r^2/(2 eps^2)) is below 1e-8 at r = 6 eps.
  // Sharp: a handful of wavelengths of the highest retained mode.
  return window_ == KernelWindow::gaussian ? 6.0 * gaussian_width(kmax_) : 8.0 / kmax_;
}

std::array<double, 2> KernelEval::velocity_kernel(Point z, bool refined) const {
  const auto& k = refined ? fine_ : coarse_;
  return {evaluate(k.u1, z.x1, z.x2), evaluate(k.u2, z.x1, z.x2)};
}

std::array<double, 2> KernelEval::grad_phi(Point x) const {
  return {evaluate(phi_1_, x.x1, x.x2), evaluate(phi_2_, x.x1, x.x2)};
}

SymmetricMatrix2 KernelEval::hessian_phi(Point x) const {
  return {evaluate(phi_11_, x.x1, x.x2), evaluate(phi_12_, x.x1, x.x2), evaluate(phi_22_, x.x1, x.x2)};
}

Point torus_difference(Point x, Point y) {
  auto reduce = [](double d) { return d - std::floor(d + 0.5); };
  return {reduce(x.x1 - y.x1), reduce(x.x2 - y.x2)};
}

KernelValue hphi_realspace(const KernelEval& ke, Point x, Point y) {
  const Point z = torus_difference(x, y);
  if (z.x1 == 0.0 && z.x2 == 0.0) throw std::invalid_argument("hphi_realspace: H_phi is undefined on the diagonal");
  const auto gx = ke.grad_phi(x);
  const auto gy = ke.grad_phi(y);
  const double d1 = gx[0] - gy[0], d2 = gx[1] - gy[1];
  const auto k = ke.velocity_kernel(z);
  const auto kf = ke.velocity_kernel(z, true);
  const double value = 0.5 * (k[0] * d1 + k[1] * d2);
  const double refined = 0.5 * (kf[0] * d1 + kf[1] * d2);
  return {value, std::abs(value - refined)};
}

double hphi_leading_term(const KernelEval& ke, Point x, Point y) {
  const Point z = torus_difference(x, y);
  const double r2 = z.x1 * z.x1 + z.x2 * z.x2;
  if (r2 == 0.0) throw std::invalid_argument("hphi_leading_term: undefined on the diagonal");
  const SymmetricMatrix2 h = ke.hessian_phi(x);
  const double sz1 = h.s11 * z.x1 + h.s12 * z.x2;
  const double sz2 = h.s12 * z.x1 + h.s22 * z.x2;
  // perp(z) = (z2, -z1)
  return (sz1 * z.x2 - sz2 * z.x1) / r2 / (4.0 * kPi);
}

double hphi_remainder(const KernelEval& ke, Point x, Point y) {
  return hphi_realspace(ke, x, y).value - hphi_leading_term(ke, x, y);
}

LipschitzFit fit_remainder_constant(const KernelEval& ke, double r_min, double r_max, std::size_t count,
                                    std::uint64_t seed) {
  if (!(0.0 < r_min && r_min <= r_max && r_max <= 0.5))
    throw std::invalid_argument("fit_remainder_constant: need 0 < r_min <= r_max <= 1/2");
  CounterRng rng(stream_key(seed, 0));
  LipschitzFit fit;
  for (std::size_t i = 0; i < count; ++i) {
    const Point x{rng.uniform(), rng.uniform()};
    const double r = r_min + (r_max - r_min) * rng.uniform();
    const double angle = kTwoPi * rng.uniform();
    const Point y{x.x1 - r * std::cos(angle), x.x2 - r * std::sin(angle)};
    const double ratio = std::abs(hphi_remainder(ke, x, y)) / r;
    if (ratio > fit.constant) {
      fit.constant = ratio;
      fit.worst_separation = r;
    }
    ++fit.pairs;
  }
  return fit;
}

namespace {

struct TraceGrids {
  GridField k1, k2;          // K on the shifted grid (separations x - y)
  GridField gx1, gx2;        // grad phi on the integer grid (x)
  GridField gy1, gy2;        // grad phi on the shifted grid (y)
};

TraceGrids trace_grids(const KernelEval& ke, int g) {
  const auto [p1, p2] = gradient(ke.phi());
  const auto& k = ke.kernel_fields();
  return {to_grid(k.u1, g, 0.5), to_grid(k.u2, g, 0.5), to_grid(p1, g), to_grid(p2, g),
          to_grid(p1, g, 0.5), to_grid(p2, g, 0.5)};
}

}  // namespace

double hphi_sup_on_grid(const KernelEval& ke, int grid_size) {
  const int g = grid_size;
  const TraceGrids t = trace_grids(ke, g);
  double worst = 0.0;
  for (int a1 = 0; a1 < g; ++a1)
    for (int a2 = 0; a2 < g; ++a2) {
      const double x1 = t.gx1(a1, a2), x2 = t.gx2(a1, a2);
      for (int k1 = 0; k1 < g; ++k1) {
        const int b1 = wrap(a1 - k1 - 1, g);
        for (int k2 = 0; k2 < g; ++k2) {
          const int b2 = wrap(a2 - k2 - 1, g);
          const double h = 0.5 * (t.k1(k1, k2) * (x1 - t.gy1(b1, b2)) + t.k2(k1, k2) * (x2 - t.gy2(b1, b2)));
          worst = std::max(worst, std::abs(h));
        }
      }
    }
  return worst;
}

double symmetry_integral(const SpectralField& kernel, SymmetricMatrix2 s, int grid_size) {
  const int g = grid_size;
  if (g < 2 || g % 2 != 0) throw std::invalid_argument("symmetry_integral: grid size must be even");
  // Node t_a = (2a + 1 - G) / (2G) is the torus point ((a + G/2) + 1/2) / G.
  const GridField w = to_grid(kernel, g, 0.5);
  std::vector<double> t(g);
  for (int a = 0; a < g; ++a) t[a] = static_cast<double>(2 * a + 1 - g) / (2.0 * g);
  double acc = 0.0;
  for (int a = 0; a < g; ++a) {
    double row = 0.0;
    for (int b = 0; b < g; ++b) {
      const double x1 = t[a], x2 = t[b];
      const double r2 = x1 * x1 + x2 * x2;
      const double angular = ((s.s11 - s.s22) * x1 * x2 + s.s12 * (x2 * x2 - x1 * x1)) / r2;
      row += w((a + g / 2) % g, (b + g / 2) % g) * angular;
    }
    acc += row;
  }
  return acc / (static_cast<double>(g) * g);
}

namespace {

std::pair<double, double> trace_sum(const KernelEval& ke, int cutoff, int g) {
  const TraceGrids t = trace_grids(ke, g);
  const GridField w = to_grid(dirichlet_kernel(cutoff), g, 0.5);
  double acc = 0.0, mag = 0.0;
  for (int a1 = 0; a1 < g; ++a1)
    for (int a2 = 0; a2 < g; ++a2) {
      const double x1 = t.gx1(a1, a2), x2 = t.gx2(a1, a2);
      double row = 0.0;
      for (int k1 = 0; k1 < g; ++k1) {
        const int b1 = wrap(a1 - k1 - 1, g);
        for (int k2 = 0; k2 < g; ++k2) {
          const int b2 = wrap(a2 - k2 - 1, g);
          const double term = w(k1, k2) * 0.5 *
                              (t.k1(k1, k2) * (x1 - t.gy1(b1, b2)) + t.k2(k1, k2) * (x2 - t.gy2(b1, b2)));
          row += term;
          mag += std::abs(term);
        }
      }
      acc += row;
    }
  const double cells = std::pow(static_cast<double>(g), 4);
  return {acc / cells, mag / cells};
}

}  // namespace

QuadratureEstimate trace_integral(const KernelEval& ke, int cutoff, int grid_size) {
  if (grid_size < 4 * cutoff + 4)
    throw std::invalid_argument("trace_integral: grid size must be >= 4N + 4");
  const auto [value, mean_abs] = trace_sum(ke, cutoff, grid_size);
  const auto [check, unused] = trace_sum(ke, cutoff, grid_size + 2);
  const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(grid_size) *
                          static_cast<double>(grid_size) * mean_abs;
  return {value, std::abs(value - check) + rounding};
}

int exact_trace_grid_size(const KernelEval& ke, int cutoff) {
  int g = std::max(4 * cutoff + 4, ke.kmax() + cutoff + support_cutoff(ke.phi()) + 1);
  if (g % 2 != 0) ++g;
  return g;
}

}  // namespace enstrophy
