#pragma once

#include <array>
#include <iosfwd>
#include <limits>

#include "tdoa/geometry.hpp"
#include "tdoa/mle.hpp"
#include "tdoa/projection.hpp"

namespace tdoa {

/// Rows ~d1 - ~d0 and ~d2 - ~d0 (unit vectors from the sensors to x).
/// Throws std::invalid_argument within eps of a sensor.
Mat2 jacobian(const SensorConfig& cfg, const Vec2& x);

/// Hessians of tau10(x) and tau20(x).
std::array<Mat2, 2> hessians(const SensorConfig& cfg, const Vec2& x);

struct Fisher {
  Mat2 g;
  Mat2 g_inv;
};

/// G = J^T Sigma2^-1 J. Throws std::domain_error when J is singular (x on D).
Fisher fisher(const SensorConfig& cfg, const Metric2& metric, const Vec2& x);

/// G^-1, the asymptotic mean square error matrix.
Mat2 asymptotic_mse(const SensorConfig& cfg, const Metric2& metric, const Vec2& x);

/// The vector b(x); the predicted bias E[xbar - x] is -b/2.
Vec2 bias_vector(const SensorConfig& cfg, const Metric2& metric, const Vec2& x);

struct CorrectedPosition {
  Vec2 position;
  bool corrected = false;  // false: estimate not finite or b unavailable there
};

/// xbar + b(xbar)/2 for a finite estimate.
CorrectedPosition bias_corrected(const SensorConfig& cfg, const Metric2& metric, const Estimate& estimate);

/// Partial derivatives D^(p,q) of the inverse map at tau2(x), p + q <= 3.
struct InverseDerivatives {
  std::array<std::array<Vec2, 4>, 4> d{};

  const Vec2& at(int p, int q) const { return d[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]; }
};

/// Nested central differences of the inverse map on the branch of x's
/// region, one Richardson step. Throws std::domain_error near D or when a
/// stencil point has no preimage on that branch, NumericalError when the
/// first derivatives disagree with J^-1.
InverseDerivatives inverse_derivatives(const SensorConfig& cfg, const Vec2& x);

/// sigma^4 correction to E[(xbar - x)(xbar - x)^T] for Sigma2 = sigma^2 I.
Mat2 remainder(const SensorConfig& cfg, double sigma, const Vec2& x);

struct AsymptoticReport {
  Vec2 x = Vec2::Zero();
  Mat2 J = Mat2::Zero();
  Mat2 G = Mat2::Zero();
  Mat2 G_inv = Mat2::Zero();
  Vec2 b = Vec2::Zero();
  Vec2 bias = Vec2::Zero();  // -b/2
  Mat2 delta = Mat2::Constant(std::numeric_limits<double>::quiet_NaN());
  Vec2 eigenvalues = Vec2::Zero();  // of G_inv, descending
  Vec2 radial = Vec2::Zero();       // eigenvector of the larger eigenvalue, pointing away from the array
  Vec2 transverse = Vec2::Zero();   // hodge(radial)
};

/// Full report. delta is computed only for isotropic Sigma2 and left NaN otherwise
/// (or when the remainder is unavailable at x).
AsymptoticReport asymptotic_report(const SensorConfig& cfg, const Metric2& metric, const Vec2& x);

/// Eigenvectors of G^-1 as columns (radial, transverse) and their eigenvalues.
void radial_transverse(const SensorConfig& cfg, const Vec2& x, const Mat2& g_inv, Vec2& eigenvalues, Vec2& radial,
                       Vec2& transverse);

void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const AsymptoticReport& r);

}  // namespace tdoa
