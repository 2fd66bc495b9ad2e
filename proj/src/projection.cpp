#include "tdoa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "tdoa/error.hpp"

namespace tdoa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// tau(phi) = P * (cos phi, sin phi).
Mat2 ellipse_basis(const SensorConfig& cfg) {
  Mat2 p;
  p << 0.0, cfg.d10(), cfg.d20() * std::sin(cfg.alpha()), cfg.d20() * std::cos(cfg.alpha());
  return p;
}

double wrap_angle(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi -= kTwoPi;
  return phi;
}

double max_abs(const Quartic& q) {
  double m = 0.0;
  for (double c : q) m = std::max(m, std::abs(c));
  return m;
}

double polish(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t, double phi) {
  const double scale = stationarity_scale(cfg, metric, t);
  double g = stationarity_residual(cfg, metric, t, phi);
  for (int it = 0; it < 10 && std::abs(g) > 1e-15 * scale; ++it) {
    const Vec2 tau = ellipse_parametrize(cfg, phi).vec();
    const Vec2 dtau = ellipse_tangent(cfg, phi);
    const double dg = -metric.dist2(dtau) - metric.inner(t.vec() - tau, tau);
    if (dg == 0.0) break;
    const double next = phi - g / dg;
    const double gn = stationarity_residual(cfg, metric, t, next);
    if (!(std::abs(gn) < std::abs(g))) break;
    phi = next;
    g = gn;
  }
  return wrap_angle(phi);
}

std::vector<EllipseProjection> stationary_points(const SensorConfig& cfg, const Metric2& metric,
                                                 const Tdoa2& t) {
  // Rotate the half-angle chart so that its excluded point is far from a root.
  double phi0 = 0.0;
  Quartic q{};
  double best = -1.0;
  for (double cand : {0.0, 0.25 * std::numbers::pi, 0.5 * std::numbers::pi, 0.75 * std::numbers::pi}) {
    const Quartic qc = projection_quartic(cfg, metric, t, cand);
    const double m = max_abs(qc);
    const double lead = m > 0.0 ? std::abs(qc[0]) / m : 0.0;
    if (lead > best) {
      best = lead;
      phi0 = cand;
      q = qc;
    }
  }

  const double merge = 1e-6 * cfg.d10();
  std::vector<double> phis;
  for (const auto& r : polynomial_roots(q)) {
    const double phi = phi0 + 2.0 * std::atan(r.real());
    if (std::abs(r.imag()) < 1e-8 * (1.0 + std::abs(r))) {
      phis.push_back(polish(cfg, metric, t, phi));
    } else if (r.imag() > 0.0) {
      // A conjugate pair whose members would merge in tau anyway is the
      // perturbed image of a double real root.
      const double spread = 2.0 * r.imag() * 2.0 / (1.0 + r.real() * r.real()) * ellipse_tangent(cfg, phi).norm();
      if (spread < merge) phis.push_back(polish(cfg, metric, t, phi));
    }
  }
  // Degree drop: the chart's excluded point is itself a root.
  const double excluded = wrap_angle(phi0 + std::numbers::pi);
  if (std::abs(stationarity_residual(cfg, metric, t, excluded)) <= 1e-12 * stationarity_scale(cfg, metric, t)) {
    phis.push_back(excluded);
  }

  std::sort(phis.begin(), phis.end());
  std::vector<EllipseProjection> out;
  for (double phi : phis) {
    const Tdoa2 p = ellipse_parametrize(cfg, phi);
    const bool dup = std::any_of(out.begin(), out.end(), [&](const EllipseProjection& e) {
      return (e.point.vec() - p.vec()).norm() < merge;
    });
    if (!dup) out.push_back({phi, p, metric.dist2(t, p)});
  }
  std::stable_sort(out.begin(), out.end(), [](const EllipseProjection& a, const EllipseProjection& b) {
    return a.distance2 < b.distance2;
  });
  return out;
}

}  // namespace

Metric2::Metric2(const Mat2& sigma2) : sigma2_(sigma2) {
  if (!sigma2.allFinite()) throw std::invalid_argument("covariance must be finite");
  if (std::abs(sigma2(0, 1) - sigma2(1, 0)) > 1e-12 * sigma2.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("covariance must be symmetric");
  }
  sigma2_(1, 0) = sigma2_(0, 1);
  Eigen::SelfAdjointEigenSolver<Mat2> es(sigma2_);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(1);
  if (!(lo > 0.0)) throw std::invalid_argument("covariance must be positive definite");
  if (hi / lo > 1e12) throw std::invalid_argument("covariance condition number exceeds 1e12");
  inv_ = sigma2_.inverse();
  inv_(1, 0) = inv_(0, 1);
}

std::string FacetProjection::name() const {
  return "P" + std::to_string(vertex) + (plus ? "+" : "-");
}

Vec2 facet_direction(int vertex, bool plus) {
  static const Vec2 v0(1.0, 1.0), v1(1.0, 0.0), v2(0.0, 1.0);
  switch (vertex) {
    case 0: return plus ? v1 : v2;
    case 1: return plus ? v0 : v2;
    case 2: return plus ? v0 : v1;
    default: throw std::out_of_range("facet vertex");
  }
}

Tdoa2 touch_point(const SensorConfig& cfg, int vertex, bool plus) {
  // a = |v|^2 - w^2 with v linear in tau, so along a tangent line a has a
  // double root at the touch point.
  const Vec2 r = cfg.vertex(vertex).vec();
  const Vec2 dir = facet_direction(vertex, plus);
  auto v = [&](const Vec2& t) { return hodge(t.y() * cfg.disp10() - t.x() * cfg.disp20()); };
  const Vec2 vd = v(dir);
  return Tdoa2::from(r - (v(r).dot(vd) / vd.squaredNorm()) * dir);
}

std::array<FacetProjection, 6> project_facets(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t) {
  std::array<FacetProjection, 6> out;
  const auto line_tol = cfg.eps() * cfg.aperture();
  for (int k = 0; k < 6; ++k) {
    const int i = k / 2;
    const bool plus = (k % 2) == 0;
    const Vec2 r = cfg.vertex(i).vec();
    const Vec2 dir = facet_direction(i, plus);
    const Vec2 p = r + (metric.inner(t.vec() - r, dir) / metric.dist2(dir)) * dir;
    auto& fp = out[static_cast<std::size_t>(k)];
    fp.point = Tdoa2::from(p);
    fp.vertex = i;
    fp.plus = plus;
    fp.distance2 = metric.dist2(t.vec() - p);
    fp.on_boundary_of_model = polytope_membership(cfg, fp.point, Strictness::Closed) &&
                              line_values(cfg, fp.point)[static_cast<std::size_t>(i)] >= -line_tol;
  }
  return out;
}

Tdoa2 ellipse_parametrize(const SensorConfig& cfg, double phi) {
  return {cfg.d10() * std::sin(phi), cfg.d20() * std::sin(phi + cfg.alpha())};
}

Vec2 ellipse_tangent(const SensorConfig& cfg, double phi) {
  return {cfg.d10() * std::cos(phi), cfg.d20() * std::cos(phi + cfg.alpha())};
}

double stationarity_residual(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t, double phi) {
  return metric.inner(t.vec() - ellipse_parametrize(cfg, phi).vec(), ellipse_tangent(cfg, phi));
}

double stationarity_scale(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t) {
  const double d = cfg.aperture();
  return (t.vec().norm() + d) * d * metric.inv().norm();
}

Quartic projection_quartic(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t, double phi0) {
  Mat2 rot;
  rot << std::cos(phi0), -std::sin(phi0), std::sin(phi0), std::cos(phi0);
  const Mat2 p = ellipse_basis(cfg) * rot;
  const Mat2 q = p.transpose() * metric.inv() * p;
  const Vec2 w = p.transpose() * metric.inv() * t.vec();
  const double q12 = 0.5 * (q(0, 1) + q(1, 0));
  const double dq = q(0, 0) - q(1, 1);
  return {-w.y() - q12, -2.0 * w.x() - 2.0 * dq, 6.0 * q12, -2.0 * w.x() + 2.0 * dq, w.y() - q12};
}

std::vector<EllipseProjection> project_ellipse(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t) {
  auto pts = stationary_points(cfg, metric, t);
  const int k = static_cast<int>(pts.size());
  if (k < 2 || k > 4) {
    throw NumericalError("ellipse projection: " + std::to_string(k) + " stationary points found");
  }
  const Quartic q = projection_quartic(cfg, metric, t);
  const double disc = quartic_discriminant(q);
  const double scale = std::pow(max_abs(q), 6);
  if (std::abs(disc) > 1e-6 * scale && ((disc > 0.0 && k != 4) || (disc < 0.0 && k != 2))) {
    throw NumericalError("ellipse projection: root count " + std::to_string(k) +
                         " contradicts the discriminant sign");
  }
  return pts;
}

int rmd(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t) {
  return static_cast<int>(stationary_points(cfg, metric, t).size());
}

double discriminant_value(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t) {
  return quartic_discriminant(projection_quartic(cfg, metric, t));
}

std::size_t Sextic::index(int i, int j) {
  if (i < 0 || j < 0 || i + j > kDegree) throw std::out_of_range("sextic monomial");
  // Monomials with first exponent < i come first.
  std::size_t base = 0;
  for (int k = 0; k < i; ++k) base += static_cast<std::size_t>(kDegree - k + 1);
  return base + static_cast<std::size_t>(j);
}

double Sextic::operator()(const Tdoa2& t) const {
  double acc = 0.0;
  for (int i = 0; i <= kDegree; ++i) {
    for (int j = 0; i + j <= kDegree; ++j) {
      acc += coeff(i, j) * std::pow(t.tau10, i) * std::pow(t.tau20, j);
    }
  }
  return acc;
}

Sextic discriminant_sextic(const SensorConfig& cfg, const Metric2& metric) {
  constexpr int kNodes = 7;
  const double s = cfg.aperture();
  std::array<double, kNodes> nodes{};
  for (int k = 0; k < kNodes; ++k) nodes[k] = std::cos(std::numbers::pi * (k + 0.5) / kNodes);

  // Fit in scaled coordinates z = tau / s.
  Eigen::MatrixXd a(kNodes * kNodes, Sextic::kTerms);
  Eigen::VectorXd y(kNodes * kNodes);
  int row = 0;
  for (double z1 : nodes) {
    for (double z2 : nodes) {
      for (int i = 0; i <= Sextic::kDegree; ++i) {
        for (int j = 0; i + j <= Sextic::kDegree; ++j) {
          a(row, static_cast<Eigen::Index>(Sextic::index(i, j))) = std::pow(z1, i) * std::pow(z2, j);
        }
      }
      y(row) = discriminant_value(cfg, metric, {s * z1, s * z2});
      ++row;
    }
  }
  const double ynorm = y.norm();
  if (ynorm == 0.0) throw NumericalError("discriminant vanishes identically");
  y /= ynorm;
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
  const double resid = (a * c - y).norm();
  if (!(resid < 1e-6)) {
    throw NumericalError("discriminant interpolation residual " + std::to_string(resid));
  }

  Sextic out;
  double largest = 0.0;
  for (int i = 0; i <= Sextic::kDegree; ++i) {
    for (int j = 0; i + j <= Sextic::kDegree; ++j) {
      const double v = c(static_cast<Eigen::Index>(Sextic::index(i, j))) / std::pow(s, i + j);
      out.coeff(i, j) = v;
      if (std::abs(v) > std::abs(largest)) largest = v;
    }
  }
  const double lead = out.coeff(Sextic::kDegree, 0);
  const double norm = std::abs(lead) > 1e-12 * std::abs(largest) ? lead : std::abs(largest);
  for (int i = 0; i <= Sextic::kDegree; ++i) {
    for (int j = 0; i + j <= Sextic::kDegree; ++j) out.coeff(i, j) /= norm;
  }
  return out;
}

void write_sextic_csv(std::ostream& out, const Sextic& s) {
  const auto old = out.precision(17);
  out << "# astroid sextic v1: coefficient of tau10^i * tau20^j\n";
  out << "i,j,coefficient\n";
  for (int i = 0; i <= Sextic::kDegree; ++i) {
    for (int j = 0; i + j <= Sextic::kDegree; ++j) out << i << ',' << j << ',' << s.coeff(i, j) << '\n';
  }
  out.precision(old);
}

}  // namespace tdoa
