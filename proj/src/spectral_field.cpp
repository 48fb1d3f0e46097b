#include "enstrophy/spectral_field.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fft.hpp"

namespace enstrophy {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int wrap(int k, int g) {
  const int r = k % g;
  return r < 0 ? r + g : r;
}
}  // namespace

SpectralField::SpectralField(int cutoff) : cutoff_(cutoff), coeffs_(lattice_size(cutoff < 0 ? 0 : cutoff)) {
  if (cutoff < 0) throw std::invalid_argument("SpectralField: negative cutoff");
}

SpectralField SpectralField::from_coefficients(int cutoff, std::vector<Complex> coeffs) {
  SpectralField f(cutoff);
  if (coeffs.size() != f.size()) throw std::invalid_argument("SpectralField: coefficient table has wrong size");
  f.coeffs_ = std::move(coeffs);
  validate(f);
  return f;
}

SpectralField SpectralField::from_generator(int cutoff, const std::function<Complex(ModeIndex)>& gen) {
  SpectralField f(cutoff);
  f.set_mean(gen({0, 0}).real());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const ModeIndex n = f.mode(i);
    if (n.is_canonical()) f.set_mode(n, gen(n));
  }
  return f;
}

void SpectralField::set_mode(ModeIndex n, Complex value) {
  if (!contains(n)) throw std::out_of_range("SpectralField::set_mode: mode " + n.str() + " outside lattice");
  if (n.is_zero()) {
    if (value.imag() != 0.0) throw InvariantViolation("SpectralField::set_mode: zero mode must be real");
    coeffs_[index(n)] = value;
    return;
  }
  coeffs_[index(n)] = value;
  coeffs_[index(-n)] = std::conj(value);
}

void SpectralField::set_mean(double value) { coeffs_[index({0, 0})] = value; }

double SpectralField::reality_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const ModeIndex n = mode(i);
    worst = std::max(worst, std::abs(coeffs_[index(-n)] - std::conj(coeffs_[i])));
  }
  return worst;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) { return axpy(1.0, other); }
SpectralField& SpectralField::operator-=(const SpectralField& other) { return axpy(-1.0, other); }

SpectralField& SpectralField::operator*=(double a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& x) {
  if (x.cutoff_ == cutoff_) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
    return *this;
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x[mode(i)];
  return *this;
}

void validate(const SpectralField& field, double tol) {
  const double r = field.reality_residual();
  if (!(r <= tol)) {
    std::ostringstream msg;
    msg << "reality constraint violated: residual " << r << " > " << tol;
    throw InvariantViolation(msg.str());
  }
}

SpectralField project(const SpectralField& field, int cutoff) {
  const SpectralField shape(cutoff);
  std::vector<Complex> coeffs(shape.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = field[shape.mode(i)];
  return SpectralField::from_coefficients(cutoff, std::move(coeffs));
}

double sobolev_norm(const SpectralField& field, double s) {
  double acc = 0.0;
  const auto c = field.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double weight = std::pow(1.0 + field.mode(i).norm2(), s);
    acc += weight * std::norm(c[i]);
  }
  return std::sqrt(acc);
}

double l2_norm_squared(const SpectralField& field) {
  double acc = 0.0;
  for (const auto& c : field.coefficients()) acc += std::norm(c);
  return acc;
}

SpectralField dirichlet_kernel(int cutoff) {
  return SpectralField::from_generator(cutoff, [](ModeIndex) { return Complex{1.0, 0.0}; });
}

double dirichlet_kernel_value(int cutoff, double x1, double x2) {
  auto d = [cutoff](double t) {
    double acc = 0.0;
    for (int k = cutoff; k >= 1; --k) acc += std::cos(kTwoPi * k * t);
    return 1.0 + 2.0 * acc;
  };
  return d(x1) * d(x2);
}

double dual_pairing(const SpectralField& a, const SpectralField& b) {
  const int common = std::min(a.cutoff(), b.cutoff());
  Complex acc{};
  double scale = 0.0;
  for (int n1 = -common; n1 <= common; ++n1)
    for (int n2 = -common; n2 <= common; ++n2) {
      const Complex term = a[{n1, n2}] * std::conj(b[{n1, n2}]);
      acc += term;
      scale += std::abs(term);
    }
  if (std::abs(acc.imag()) > kHardFailTol * std::max(1.0, scale)) {
    std::ostringstream msg;
    msg << "dual_pairing: imaginary residual " << acc.imag() << " (reality constraint broken)";
    throw InvariantViolation(msg.str());
  }
  return acc.real();
}

double evaluate(const SpectralField& field, double x1, double x2) {
  const int n = field.cutoff();
  const int side = 2 * n + 1;
  std::vector<Complex> e1(side), e2(side);
  for (int k = -n; k <= n; ++k) {
    e1[k + n] = std::polar(1.0, kTwoPi * k * x1);
    e2[k + n] = std::polar(1.0, kTwoPi * k * x2);
  }
  double acc = field[{0, 0}].real();
  for (std::size_t i = 0; i < field.size(); ++i) {
    const ModeIndex m = field.mode(i);
    if (!m.is_canonical()) continue;
    acc += 2.0 * (field.coefficients()[i] * e1[m.n1 + n] * e2[m.n2 + n]).real();
  }
  return acc;
}

std::pair<SpectralField, SpectralField> gradient(const SpectralField& field) {
  SpectralField d1(field.cutoff()), d2(field.cutoff());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const ModeIndex n = field.mode(i);
    if (!n.is_canonical()) continue;
    const Complex c = field.coefficients()[i];
    d1.set_mode(n, Complex{0.0, kTwoPi * n.n1} * c);
    d2.set_mode(n, Complex{0.0, kTwoPi * n.n2} * c);
  }
  return {std::move(d1), std::move(d2)};
}

GridField to_grid(const SpectralField& field, int grid_size, double shift) {
  if (grid_size < 1) throw std::invalid_argument("to_grid: grid size must be positive");
  const int g = grid_size;
  std::vector<Complex> buf(static_cast<std::size_t>(g) * g);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const ModeIndex n = field.mode(i);
    Complex c = field.coefficients()[i];
    if (shift != 0.0) c *= std::polar(1.0, kTwoPi * (n.n1 + n.n2) * shift / g);
    buf[static_cast<std::size_t>(wrap(n.n1, g)) * g + wrap(n.n2, g)] += c;
  }
  detail::dft_2d(buf, g, +1);
  GridField out{g, shift, std::vector<double>(buf.size())};
  for (std::size_t i = 0; i < buf.size(); ++i) out.values[i] = buf[i].real();
  return out;
}

SpectralField from_grid(const GridField& grid, int cutoff) {
  const int g = grid.size;
  if (g < 2 * cutoff + 1)
    throw std::invalid_argument("from_grid: grid size " + std::to_string(g) + " < 2N+1 = " +
                                std::to_string(2 * cutoff + 1) + " would alias");
  std::vector<Complex> buf(grid.values.begin(), grid.values.end());
  detail::dft_2d(buf, g, -1);
  const double norm = 1.0 / (static_cast<double>(g) * g);
  auto coeff = [&](ModeIndex n) {
    Complex c = buf[static_cast<std::size_t>(wrap(n.n1, g)) * g + wrap(n.n2, g)] * norm;
    if (grid.shift != 0.0) c *= std::polar(1.0, -kTwoPi * (n.n1 + n.n2) * grid.shift / g);
    return c;
  };
  SpectralField out(cutoff);
  out.set_mean(coeff({0, 0}).real());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex n = out.mode(i);
    if (!n.is_canonical()) continue;
    // Average with the mirror so rounding never breaks exact Hermitian symmetry.
    out.set_mode(n, 0.5 * (coeff(n) + std::conj(coeff(-n))));
  }
  return out;
}

void write_csv(std::ostream& out, const SpectralField& field) {
  out << "n1,n2,re,im\n";
  std::ostringstream row;
  row.precision(17);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const ModeIndex n = field.mode(i);
    const Complex c = field.coefficients()[i];
    row.str("");
    row << n.n1 << ',' << n.n2 << ',' << c.real() << ',' << c.imag() << '\n';
    out << row.str();
  }
}

SpectralField read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n1,n2,re,im")
    throw std::runtime_error("field CSV: expected header 'n1,n2,re,im'");
  std::vector<std::pair<ModeIndex, Complex>> rows;
  int cutoff = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ModeIndex n;
    double re = 0.0, im = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> n.n1 >> c1 >> n.n2 >> c2 >> re >> c3 >> im) || c1 != ',' || c2 != ',' || c3 != ',')
      throw std::runtime_error("field CSV: malformed row '" + line + "'");
    cutoff = std::max(cutoff, n.sup_norm());
    rows.emplace_back(n, Complex{re, im});
  }
  if (rows.size() != lattice_size(cutoff))
    throw std::runtime_error("field CSV: expected " + std::to_string(lattice_size(cutoff)) + " rows, got " +
                             std::to_string(rows.size()));
  std::vector<Complex> coeffs(rows.size());
  SpectralField probe(cutoff);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (probe.mode(i) != rows[i].first) throw std::runtime_error("field CSV: rows not in lexicographic order");
    coeffs[i] = rows[i].second;
  }
  return SpectralField::from_coefficients(cutoff, std::move(coeffs));
}

}  // namespace enstrophy
