#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tdoa/geometry.hpp"
#include "tdoa/projection.hpp"

namespace tdoa {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Normal of the plane t10 - t20 + t21 = 0 that holds every noiseless measurement.
inline Vec3 plane_normal() { return {1.0, -1.0, 1.0}; }

/// Matrix of the Sigma^-1-orthogonal projection onto the plane followed by
/// dropping the third coordinate.
Mat23 reduction_matrix(const Mat3& sigma3);

/// Gaussian noise model. Built either from a full 3x3 covariance or directly
/// from the reduced 2x2 covariance (sigma3 is empty in that case).
struct NoiseModel {
  std::optional<Mat3> sigma3;
  Mat23 P = Mat23::Zero();
  Metric2 sigma2;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument unless sigma3 is symmetric positive definite.
NoiseModel reduce_covariance(const Mat3& sigma3, std::uint64_t seed = 0);

/// Noise specified on the tau-plane. P is the plain coordinate drop.
NoiseModel reduced_noise(const Mat2& sigma2, std::uint64_t seed = 0);

Tdoa2 sufficient_statistic(const NoiseModel& model, const Tdoa3& t_star);

/// Stateless generator: every draw is a hash of (seed, stream, counter), so
/// workers can sample any (stream, counter) pair without coordination.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t counter) const;

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t counter) const;

  /// Two independent standard normals (Box-Muller on counters 2k, 2k+1).
  Vec2 normal_pair(std::uint64_t k) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Lower Cholesky factor; throws std::invalid_argument if not positive definite.
Mat2 cholesky2(const Mat2& s);
Mat3 cholesky3(const Mat3& s);

/// Draw number `trial` of N(0, Sigma2) on stream `stream`.
Vec2 draw_noise2(const NoiseModel& model, const Mat2& chol, std::uint64_t stream, std::uint64_t trial);

/// Draw number `trial` of N(0, Sigma) in full tau-space. Requires sigma3.
Vec3 draw_noise3(const NoiseModel& model, const Mat3& chol, std::uint64_t stream, std::uint64_t trial);

/// tdoa_map(x) + N(0, Sigma2) for trials 0..n-1 of the given stream.
std::vector<Tdoa2> sample(const NoiseModel& model, const SensorConfig& cfg, const Vec2& x, std::size_t n_trials,
                          std::uint64_t stream = 0);

}  // namespace tdoa
