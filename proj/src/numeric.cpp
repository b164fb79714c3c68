#include "bhtbp/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"

namespace bhtbp::numeric {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  // Relative termination well below the absolute target but above roundoff;
  // asking for less than ~1e-13 makes the bisection chase noise to full depth.
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, 1e-12, &error, &l1);
  if (!std::isfinite(value) || error > abs_tol) {
    throw NumericalError(
        fmt::format("quadrature over [{}, {}] did not reach tolerance {} (error {})", a, b,
                    abs_tol, error));
  }
  return value;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw NumericalError(fmt::format("bisection bracket [{}, {}] has no sign change", lo, hi));
  }
  // x_tol = 0 runs to full double precision.
  auto done = [x_tol](double a, double b) {
    const double width = std::abs(b - a);
    return width < x_tol ||
           width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t max_iter = 400;
  const auto [a, b] = boost::math::tools::bisect(f, lo, hi, done, max_iter);
  return 0.5 * (a + b);
}

double normal_pdf(double x, double sigma) {
  const double u = x / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace bhtbp::numeric
