#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <type_traits>

#include "fmpair/error.hpp"

namespace fmpair::quad {

namespace detail {
template <class T> struct real_of { using type = T; };
template <class T> struct real_of<std::complex<T>> { using type = T; };
}  // namespace detail

template <class T> using real_of_t = typename detail::real_of<T>::type;

/// Adaptive 15-point Gauss-Kronrod over [a, b]. Accepts real or complex
/// integrands. Succeeds when the error estimate is below `abs_tol` or below
/// `rel_tol` times the L1 norm; otherwise throws NumericalError.
template <class Real, class F>
auto integrate(F&& f, Real a, Real b, Real abs_tol, Real rel_tol = Real(0), unsigned max_depth = 20) {
  using boost::math::quadrature::gauss_kronrod;
  Real err = 0;
  Real l1 = 0;
  // Boost refines until |K15 - G7| < target × |estimate| on every panel; below
  // ~50 eps that test never passes and the recursion runs to max_depth everywhere.
  const Real target = std::max(rel_tol, std::numeric_limits<Real>::epsilon() * 50);
  auto r = gauss_kronrod<Real, 15>::integrate(f, a, b, max_depth, target, &err, &l1);
  if (!(err <= abs_tol || err <= rel_tol * l1)) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << double(a) << ", " << double(b)
       << "]: error estimate " << double(err) << " exceeds tolerance " << double(abs_tol);
    throw NumericalError(os.str());
  }
  return r;
}

/// Fixed 15-point Gauss-Kronrod on one panel; returns the Kronrod estimate and
/// writes |K15 - G7| to `err`. Used where many small panels are summed.
template <class Real, class F>
auto panel(F&& f, Real a, Real b, Real& err) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<Real, 15>::integrate(f, a, b, 0, Real(0), &err);
}

/// Composite Gauss-Legendre with `panels` equal panels of 10 nodes each.
/// Nodes are visited in increasing abscissa order, which callers rely on for
/// continuation of multivalued integrands.
template <class Real, class F>
auto gauss_legendre_ordered(F&& f, Real a, Real b, int panels) {
  using Rule = boost::math::quadrature::gauss<Real, 10>;
  const auto& x = Rule::abscissa();  // non-negative half, x[0] == 0 for odd N only
  const auto& w = Rule::weights();
  using R = std::invoke_result_t<F&, Real>;
  R sum{};
  const Real width = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const Real lo = a + width * k;
    const Real mid = lo + width / 2;
    const Real half = width / 2;
    R panel_sum{};
    // negative abscissae first, ascending
    for (int j = int(x.size()) - 1; j >= 0; --j) {
      if (x[j] == Real(0)) continue;
      panel_sum += w[j] * f(mid - half * x[j]);
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      panel_sum += w[j] * f(mid + half * x[j]);
    }
    sum += panel_sum * half;
  }
  return sum;
}

}  // namespace fmpair::quad
