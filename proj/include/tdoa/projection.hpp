#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdoa/geometry.hpp"
#include "tdoa/polynomial.hpp"

namespace tdoa {

/// Reduced covariance Sigma2 together with its inverse, the Mahalanobis metric.
class Metric2 {
 public:
  /// Throws std::invalid_argument unless sigma2 is symmetric positive definite
  /// with condition number <= 1e12.
  explicit Metric2(const Mat2& sigma2);

  static Metric2 isotropic(double sigma) { return Metric2(sigma * sigma * Mat2::Identity()); }

  const Mat2& sigma2() const { return sigma2_; }
  const Mat2& inv() const { return inv_; }

  double inner(const Vec2& u, const Vec2& v) const { return u.dot(inv_ * v); }
  double dist2(const Vec2& d) const { return d.dot(inv_ * d); }
  double dist2(const Tdoa2& a, const Tdoa2& b) const { return dist2(a.vec() - b.vec()); }

 private:
  Mat2 sigma2_;
  Mat2 inv_;
};

/// Projection onto one of the six lines supporting the hexagon facets.
/// Facet k = 2*vertex + (plus ? 0 : 1): the lines through R^vertex.
struct FacetProjection {
  Tdoa2 point;
  int vertex = 0;
  bool plus = true;
  bool on_boundary_of_model = false;
  double distance2 = 0.0;

  std::string name() const;
};

/// Direction of facet line s_vertex^(plus ? + : -).
Vec2 facet_direction(int vertex, bool plus);

/// Point where facet line s_vertex^(plus ? + : -) touches the ellipse.
Tdoa2 touch_point(const SensorConfig& cfg, int vertex, bool plus);

std::array<FacetProjection, 6> project_facets(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t);

/// tau(phi) = (d10 sin phi, d20 sin(phi + alpha)).
Tdoa2 ellipse_parametrize(const SensorConfig& cfg, double phi);

/// d tau / d phi.
Vec2 ellipse_tangent(const SensorConfig& cfg, double phi);

/// <t - tau(phi), tau'(phi)>_metric; zero at stationary points of the distance.
double stationarity_residual(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t, double phi);

/// Scale used to make stationarity residuals relative.
double stationarity_scale(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t);

struct EllipseProjection {
  double phi = 0.0;
  Tdoa2 point;
  double distance2 = 0.0;
};

/// Stationarity condition as a quartic in u = tan((phi - phi0) / 2).
Quartic projection_quartic(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t, double phi0 = 0.0);

/// All distinct real stationary points of the distance from t to the ellipse,
/// sorted by distance (ties: smaller phi first). Throws NumericalError when
/// the root count contradicts the discriminant sign.
std::vector<EllipseProjection> project_ellipse(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t);

/// Number of distinct real stationary points (2, 3 or 4).
int rmd(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t);

/// Discriminant of projection_quartic(t): > 0 inside the astroid (4 projections),
/// < 0 outside (2 projections), 0 on it.
double discriminant_value(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t);

/// Bivariate polynomial of total degree <= 6 in (tau10, tau20).
class Sextic {
 public:
  static constexpr int kDegree = 6;
  static constexpr int kTerms = 28;

  double& coeff(int i, int j) { return c_[index(i, j)]; }
  double coeff(int i, int j) const { return c_[index(i, j)]; }
  double operator()(const Tdoa2& t) const;

  /// Monomial order used by index(): (i, j) with i + j <= 6, i outer.
  static std::size_t index(int i, int j);

 private:
  std::array<double, kTerms> c_{};
};

/// Cartesian equation of the astroid, recovered by interpolating
/// discriminant_value on a 7x7 Chebyshev grid. Normalised so the tau10^6
/// coefficient is 1 (or the largest coefficient is +-1 when that vanishes).
Sextic discriminant_sextic(const SensorConfig& cfg, const Metric2& metric);

/// CSV rows "i,j,coefficient" (coefficient of tau10^i tau20^j).
void write_sextic_csv(std::ostream& out, const Sextic& s);

}  // namespace tdoa
