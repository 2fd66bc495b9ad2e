#include "tdoa/statmodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace tdoa {

namespace {

void require_spd3(const Mat3& s) {
  if (!s.allFinite()) throw std::invalid_argument("covariance must be finite");
  const double scale = s.cwiseAbs().maxCoeff();
  if (!((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) {
    throw std::invalid_argument("covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(s);
  if (!(es.eigenvalues()(0) > 1e-12 * es.eigenvalues()(2))) {
    throw std::invalid_argument("covariance must be positive definite");
  }
}

}  // namespace

Mat23 reduction_matrix(const Mat3& sigma3) {
  const Vec3 n = plane_normal();
  const Vec3 sn = sigma3 * n;
  const Mat3 ph = Mat3::Identity() - sn * n.transpose() / n.dot(sn);
  return ph.topRows<2>();
}

NoiseModel reduce_covariance(const Mat3& sigma3, std::uint64_t seed) {
  require_spd3(sigma3);
  const Mat3 s = 0.5 * (sigma3 + sigma3.transpose());
  const Mat23 p = reduction_matrix(s);
  Mat2 s2 = p * s * p.transpose();
  s2(1, 0) = s2(0, 1);
  return {s, p, Metric2(s2), seed};
}

NoiseModel reduced_noise(const Mat2& sigma2, std::uint64_t seed) {
  Mat23 p = Mat23::Zero();
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  return {std::nullopt, p, Metric2(sigma2), seed};
}

Tdoa2 sufficient_statistic(const NoiseModel& model, const Tdoa3& t_star) {
  return Tdoa2::from(model.P * t_star.vec());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(splitmix64(splitmix64(seed_) ^ stream_) ^ counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

Vec2 CounterRng::normal_pair(std::uint64_t k) const {
  const double u1 = uniform(2 * k);
  const double u2 = uniform(2 * k + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

Mat2 cholesky2(const Mat2& s) {
  Eigen::LLT<Mat2> llt(s);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("matrix is not positive definite");
  return llt.matrixL();
}

Mat3 cholesky3(const Mat3& s) {
  Eigen::LLT<Mat3> llt(s);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("matrix is not positive definite");
  return llt.matrixL();
}

Vec2 draw_noise2(const NoiseModel& model, const Mat2& chol, std::uint64_t stream, std::uint64_t trial) {
  return chol * CounterRng(model.seed, stream).normal_pair(trial);
}

Vec3 draw_noise3(const NoiseModel& model, const Mat3& chol, std::uint64_t stream, std::uint64_t trial) {
  // Three normals from two pairs; the fourth is discarded.
  const CounterRng rng(model.seed, stream);
  const Vec2 a = rng.normal_pair(2 * trial);
  const Vec2 b = rng.normal_pair(2 * trial + 1);
  return chol * Vec3(a.x(), a.y(), b.x());
}

std::vector<Tdoa2> sample(const NoiseModel& model, const SensorConfig& cfg, const Vec2& x, std::size_t n_trials,
                          std::uint64_t stream) {
  if (n_trials == 0) throw std::invalid_argument("n_trials must be at least 1");
  const Mat2 chol = cholesky2(model.sigma2.sigma2());
  const Vec2 t = tdoa_map(cfg, x).vec();
  std::vector<Tdoa2> out;
  out.reserve(n_trials);
  for (std::size_t k = 0; k < n_trials; ++k) out.push_back(Tdoa2::from(t + draw_noise2(model, chol, stream, k)));
  return out;
}

}  // namespace tdoa
