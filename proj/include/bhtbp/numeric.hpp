#pragma once

#include <functional>

namespace bhtbp::numeric {

/// Adaptive Gauss-Kronrod quadrature of f over [a, b]. Throws NumericalError
/// when the error estimate exceeds `abs_tol`.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

/// Bisection on a verified sign-changing bracket [lo, hi] until the bracket
/// width is below `x_tol`. Returns the midpoint of the final bracket.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol);

/// Standard normal density and Gaussian density with std `sigma`.
double normal_pdf(double x, double sigma);

}  // namespace bhtbp::numeric
