#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fmpair {

/// A local maximum of a sampled curve, refined by a parabola through the
/// sample and its two neighbours.
struct LocalMax {
  std::size_t index = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Local maxima of y(x) whose sampled height is at least `floor_abs`.
/// Interior points only; a flat top reports its centre.
/// x must be uniformly spaced for the parabolic refinement to be exact.
inline std::vector<LocalMax> local_maxima(std::span<const double> x, std::span<const double> y, double floor_abs) {
  if (x.size() != y.size()) throw std::invalid_argument("local_maxima: size mismatch");
  std::vector<LocalMax> out;
  const std::size_t n = y.size();
  if (n < 3) return out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (y[i] < floor_abs || !(y[i] > y[i - 1])) continue;
    // walk across a plateau
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) continue;
    LocalMax m{i, x[i], y[i]};
    if (j == i) {
      const double ym = y[i - 1];
      const double y0 = y[i];
      const double yp = y[i + 1];
      const double denom = ym - 2.0 * y0 + yp;
      if (denom < 0.0) {
        const double delta = 0.5 * (ym - yp) / denom;  // in units of the sample step, |delta| <= 1/2
        const double dx = 0.5 * (x[i + 1] - x[i - 1]);
        m.x = x[i] + delta * dx;
        m.y = y0 - 0.25 * (ym - yp) * delta;
      }
    } else {
      m.x = 0.5 * (x[i] + x[j]);
    }
    out.push_back(m);
    i = j;
  }
  return out;
}

}  // namespace fmpair
