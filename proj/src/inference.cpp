#include "tdoa/inference.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "tdoa/error.hpp"

namespace tdoa {

namespace {

// Unit vector from sensor i to x, and the distance.
std::pair<Vec2, double> unit_from(const SensorConfig& cfg, int i, const Vec2& x) {
  const Vec2 r = x - cfg.sensor(i);
  const double d = r.norm();
  if (d < cfg.eps()) throw std::invalid_argument("x coincides with a sensor");
  return {r / d, d};
}

double row_norm_product(const Mat2& j) { return j.row(0).norm() * j.row(1).norm(); }

bool isotropic(const Metric2& metric, double& sigma) {
  const Mat2& s = metric.sigma2();
  const double scale = 0.5 * (s(0, 0) + s(1, 1));
  if (std::abs(s(0, 1)) > 1e-12 * scale || std::abs(s(0, 0) - s(1, 1)) > 1e-12 * scale) return false;
  sigma = std::sqrt(scale);
  return true;
}

// Derivatives at stencil spacing `unit` * base step, from cached samples.
template <class F>
InverseDerivatives differences(F&& f, int unit, double h) {
  auto at = [&](int i, int j) { return f(i * unit, j * unit); };
  InverseDerivatives d;
  const Vec2 c = at(0, 0);
  d.d[0][0] = c;
  d.d[1][0] = (at(1, 0) - at(-1, 0)) / (2.0 * h);
  d.d[0][1] = (at(0, 1) - at(0, -1)) / (2.0 * h);
  d.d[2][0] = (at(1, 0) - 2.0 * c + at(-1, 0)) / (h * h);
  d.d[0][2] = (at(0, 1) - 2.0 * c + at(0, -1)) / (h * h);
  d.d[1][1] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
  const double h3 = 2.0 * h * h * h;
  d.d[3][0] = (at(2, 0) - 2.0 * at(1, 0) + 2.0 * at(-1, 0) - at(-2, 0)) / h3;
  d.d[0][3] = (at(0, 2) - 2.0 * at(0, 1) + 2.0 * at(0, -1) - at(0, -2)) / h3;
  d.d[2][1] = ((at(1, 1) - 2.0 * at(0, 1) + at(-1, 1)) - (at(1, -1) - 2.0 * at(0, -1) + at(-1, -1))) / h3;
  d.d[1][2] = ((at(1, 1) - 2.0 * at(1, 0) + at(1, -1)) - (at(-1, 1) - 2.0 * at(-1, 0) + at(-1, -1))) / h3;
  return d;
}

}  // namespace

Mat2 jacobian(const SensorConfig& cfg, const Vec2& x) {
  const Vec2 u0 = unit_from(cfg, 0, x).first;
  const Vec2 u1 = unit_from(cfg, 1, x).first;
  const Vec2 u2 = unit_from(cfg, 2, x).first;
  Mat2 j;
  j.row(0) = (u1 - u0).transpose();
  j.row(1) = (u2 - u0).transpose();
  return j;
}

std::array<Mat2, 2> hessians(const SensorConfig& cfg, const Vec2& x) {
  auto term = [&](int i) {
    const auto [u, d] = unit_from(cfg, i, x);
    return Mat2((Mat2::Identity() - u * u.transpose()) / d);
  };
  const Mat2 h0 = term(0);
  return {term(1) - h0, term(2) - h0};
}

Fisher fisher(const SensorConfig& cfg, const Metric2& metric, const Vec2& x) {
  const Mat2 j = jacobian(cfg, x);
  if (std::abs(j.determinant()) <= 1e-12 * row_norm_product(j)) {
    throw std::domain_error("Fisher matrix is singular on the degeneracy locus");
  }
  Fisher f;
  f.g = j.transpose() * metric.inv() * j;
  f.g(1, 0) = f.g(0, 1);
  const Mat2 ji = j.inverse();
  f.g_inv = ji * metric.sigma2() * ji.transpose();
  f.g_inv(1, 0) = f.g_inv(0, 1);
  return f;
}

Mat2 asymptotic_mse(const SensorConfig& cfg, const Metric2& metric, const Vec2& x) {
  return fisher(cfg, metric, x).g_inv;
}

Vec2 bias_vector(const SensorConfig& cfg, const Metric2& metric, const Vec2& x) {
  const Fisher f = fisher(cfg, metric, x);
  const auto hs = hessians(cfg, x);
  const Vec2 tr((hs[0] * f.g_inv).trace(), (hs[1] * f.g_inv).trace());
  // Row vector tr times (J^-1)^T.
  return jacobian(cfg, x).inverse() * tr;
}

CorrectedPosition bias_corrected(const SensorConfig& cfg, const Metric2& metric, const Estimate& estimate) {
  CorrectedPosition out;
  const auto* p = std::get_if<Vec2>(&estimate.location);
  if (!p) {
    if (const auto* s = std::get_if<SensorVertex>(&estimate.location)) out.position = cfg.sensor(s->index);
    return out;
  }
  out.position = *p;
  try {
    if (region_classify(cfg, *p) == Region::DegeneracyLocus) return out;
    out.position = *p + 0.5 * bias_vector(cfg, metric, *p);
    out.corrected = true;
  } catch (const std::exception&) {
    out.position = *p;
  }
  return out;
}

InverseDerivatives inverse_derivatives(const SensorConfig& cfg, const Vec2& x) {
  const Mat2 j = jacobian(cfg, x);
  if (std::abs(j.determinant()) < 1e-3 * row_norm_product(j)) {
    throw std::domain_error("too close to the degeneracy locus for the remainder");
  }
  const Region region = region_classify(cfg, x);
  if (region == Region::DegeneracyLocus) throw std::domain_error("x on the degeneracy locus");
  const Branch branch = branch_for(region);
  const Vec2 t = tdoa_map(cfg, x).vec();
  const double h = 1e-3 * (1.0 + t.norm());
  const double unit = 0.5 * h;

  std::map<std::pair<int, int>, Vec2> cache;
  auto f = [&](int i, int k) -> Vec2 {
    const auto key = std::make_pair(i, k);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const Tdoa2 s = Tdoa2::from(t + unit * Vec2(i, k));
    Preimage p;
    try {
      p = inverse_map(cfg, s, branch);
    } catch (const std::domain_error&) {
      throw std::domain_error("remainder stencil leaves the model's parameter set");
    }
    const auto* v = std::get_if<Vec2>(&p);
    if (!v) throw std::domain_error("remainder stencil reaches the point at infinity");
    cache.emplace(key, *v);
    return *v;
  };

  const InverseDerivatives coarse = differences(f, 2, h);
  const InverseDerivatives fine = differences(f, 1, unit);
  InverseDerivatives out;
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t q = 0; p + q < 4; ++q) out.d[p][q] = (4.0 * fine.d[p][q] - coarse.d[p][q]) / 3.0;
  }
  out.d[0][0] = x;

  const Mat2 ji = j.inverse();
  Mat2 fd;
  fd.col(0) = out.at(1, 0);
  fd.col(1) = out.at(0, 1);
  if ((fd - ji).norm() > 1e-5 * ji.norm()) {
    throw NumericalError("inverse-map differences disagree with J^-1");
  }
  return out;
}

Mat2 remainder(const SensorConfig& cfg, double sigma, const Vec2& x) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const InverseDerivatives d = inverse_derivatives(cfg, x);
  Mat2 delta;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      auto D = [&](int p, int q, int k) { return d.at(p, q)(k); };
      delta(i, j) = 3.0 * (D(2, 0, i) * D(2, 0, j) + D(0, 2, i) * D(0, 2, j)) + D(2, 0, i) * D(0, 2, j) +
                    D(0, 2, i) * D(2, 0, j) + 4.0 * D(1, 1, i) * D(1, 1, j) +
                    2.0 * D(1, 0, i) * (D(3, 0, j) + D(1, 2, j)) + 2.0 * D(0, 1, i) * (D(0, 3, j) + D(2, 1, j)) +
                    2.0 * D(1, 0, j) * (D(3, 0, i) + D(1, 2, i)) + 2.0 * D(0, 1, j) * (D(0, 3, i) + D(2, 1, i));
    }
  }
  const double s2 = sigma * sigma;
  return 0.25 * s2 * s2 * delta;
}

void radial_transverse(const SensorConfig& cfg, const Vec2& x, const Mat2& g_inv, Vec2& eigenvalues, Vec2& radial,
                       Vec2& transverse) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(g_inv);
  eigenvalues = Vec2(es.eigenvalues()(1), es.eigenvalues()(0));
  radial = es.eigenvectors().col(1);
  const Vec2 centroid = (cfg.sensor(0) + cfg.sensor(1) + cfg.sensor(2)) / 3.0;
  if (radial.dot(x - centroid) < 0.0) radial = -radial;
  transverse = hodge(radial);
}

AsymptoticReport asymptotic_report(const SensorConfig& cfg, const Metric2& metric, const Vec2& x) {
  AsymptoticReport r;
  r.x = x;
  r.J = jacobian(cfg, x);
  const Fisher f = fisher(cfg, metric, x);
  r.G = f.g;
  r.G_inv = f.g_inv;
  r.b = bias_vector(cfg, metric, x);
  r.bias = -0.5 * r.b;
  radial_transverse(cfg, x, r.G_inv, r.eigenvalues, r.radial, r.transverse);
  double sigma = 0.0;
  if (isotropic(metric, sigma)) {
    try {
      r.delta = remainder(cfg, sigma, x);
    } catch (const std::domain_error&) {
    } catch (const NumericalError&) {
    }
  }
  return r;
}

void write_report_header(std::ostream& out) {
  out << "x,y,g11,g12,g22,ginv_eig1,ginv_eig2,bias_r,bias_t,delta_eig1,delta_eig2\n";
}

void write_report_row(std::ostream& out, const AsymptoticReport& r) {
  const auto old = out.precision(17);
  out << r.x.x() << ',' << r.x.y() << ',' << r.G(0, 0) << ',' << r.G(0, 1) << ',' << r.G(1, 1) << ','
      << r.eigenvalues(0) << ',' << r.eigenvalues(1) << ',' << r.bias.dot(r.radial) << ','
      << r.bias.dot(r.transverse) << ',' << r.radial.dot(r.delta * r.radial) << ','
      << r.transverse.dot(r.delta * r.transverse) << '\n';
  out.precision(old);
}

}  // namespace tdoa
