#pragma once

#include "enstrophy/measure.hpp"

namespace testing_helpers {

using namespace enstrophy;

inline SpectralField trig(ModeIndex n, Complex coefficient) {
  SpectralField f(n.sup_norm());
  f.set_mode(n, coefficient);
  return f;
}

/// amp cos(2 pi n.x)
inline SpectralField cos_mode(ModeIndex n, double amp = 1.0) { return trig(n, {0.5 * amp, 0.0}); }
/// amp sin(2 pi n.x)
inline SpectralField sin_mode(ModeIndex n, double amp = 1.0) { return trig(n, {0.0, -0.5 * amp}); }

inline SpectralField random_field(int cutoff, std::uint64_t index, std::uint64_t seed = 77) {
  return sample_mu_n({cutoff, true, seed}, index);
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  const int n = std::max(a.cutoff(), b.cutoff());
  double worst = 0.0;
  for (int n1 = -n; n1 <= n; ++n1)
    for (int n2 = -n; n2 <= n; ++n2) worst = std::max(worst, std::abs(a[{n1, n2}] - b[{n1, n2}]));
  return worst;
}

}  // namespace testing_helpers
