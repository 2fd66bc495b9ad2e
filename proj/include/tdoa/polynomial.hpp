#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace tdoa {

/// Quartic coefficients, highest degree first: q[0] u^4 + q[1] u^3 + ... + q[4].
using Quartic = std::array<double, 5>;

/// Classical discriminant of a*u^4 + b*u^3 + c*u^2 + d*u + e.
/// Positive: four real or four complex roots. Negative: two real, two complex.
double quartic_discriminant(const Quartic& q);

/// Roots as eigenvalues of the companion matrix. Coefficients are highest
/// degree first; leading coefficients below 1e-14 * max|coeff| are dropped.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

double horner(std::span<const double> coeffs, double x);

}  // namespace tdoa
