#pragma once

#include <array>
#include <iosfwd>
#include <variant>

#include <Eigen/Core>

namespace tdoa {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Reduced measurement: range differences relative to the reference sensor m0.
/// Signal speed is normalised to 1, so TDOAs are expressed in meters.
struct Tdoa2 {
  double tau10 = 0.0;
  double tau20 = 0.0;

  Vec2 vec() const { return {tau10, tau20}; }
  static Tdoa2 from(const Vec2& v) { return {v.x(), v.y()}; }
};

/// Complete measurement (all three range differences).
struct Tdoa3 {
  double tau10 = 0.0;
  double tau20 = 0.0;
  double tau21 = 0.0;

  Tdoa2 reduced() const { return {tau10, tau20}; }
  Eigen::Vector3d vec() const { return {tau10, tau20, tau21}; }
};

enum class Region { Omega, Omega0, Omega1, Omega2, DegeneracyLocus };

const char* to_string(Region r);

enum class Branch { Plus, Minus };

/// Source at infinity: unit bearing from the array toward the source.
struct IdealDirection {
  Vec2 unit;
};

/// Estimate coinciding with one of the receivers.
struct SensorVertex {
  int index = 0;
};

using Preimage = std::variant<Vec2, IdealDirection>;
using Location = std::variant<Vec2, IdealDirection, SensorVertex>;

/// Coefficients of the quadratic a*l^2 + 2*b*l + c = 0 whose roots give the
/// preimages m0 + l0 + l*v of a tau-plane point.
struct ConicCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Vec2 v = Vec2::Zero();
  Vec2 l0 = Vec2::Zero();
};

/// Values of the three chord polynomials through the ellipse tangency points.
using LineValues = std::array<double, 3>;

enum class Strictness { Closed, Open };

/// Three non-collinear receivers and the derived displacement geometry.
///
/// The receivers are stored so that d10, d20 are counterclockwise oriented.
/// When the caller supplies a clockwise triple, m1 and m2 are swapped and
/// relabeled() reports it; to_internal() / user_sensor() translate between
/// the caller's labels and the stored ones.
class SensorConfig {
 public:
  SensorConfig(const Vec2& m0, const Vec2& m1, const Vec2& m2);

  const Vec2& sensor(int i) const { return m_[static_cast<std::size_t>(i)]; }
  bool relabeled() const { return swapped_; }

  const Vec2& disp10() const { return d10_; }
  const Vec2& disp20() const { return d20_; }
  const Vec2& disp21() const { return d21_; }
  double d10() const { return n10_; }
  double d20() const { return n20_; }
  double d21() const { return n21_; }

  /// *(d10 ^ d20), strictly positive.
  double wedge() const { return wedge_; }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

  /// Largest inter-sensor distance.
  double aperture() const { return aperture_; }

  /// Absolute boundary tolerance (meters): 1e-9 * aperture.
  double eps() const { return eps_; }

  /// Vertex R^i of the hexagon, image of sensor i.
  Tdoa2 vertex(int i) const;

  /// Tangency point T_i^+ (plus = true) or T_i^- of the ellipse with the hexagon.
  Tdoa2 tangency(int i, bool plus) const;

  /// Caller-labeled TDOAs -> stored labeling.
  Tdoa2 to_internal(const Tdoa2& user) const;
  Tdoa2 to_user(const Tdoa2& internal) const { return to_internal(internal); }

  /// Stored sensor index -> caller's index.
  int user_sensor(int internal) const;

 private:
  std::array<Vec2, 3> m_;
  bool swapped_ = false;
  Vec2 d10_, d20_, d21_;
  double n10_ = 0, n20_ = 0, n21_ = 0;
  double wedge_ = 0;
  double alpha_ = 0, beta_ = 0, gamma_ = 0;
  double aperture_ = 0;
  double eps_ = 0;
};

/// Canonical receivers (0,0), (2,0), (2,2).
SensorConfig canonical_config();

/// det[u v] = u1 v2 - u2 v1.
inline double wedge_star(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

/// Counterclockwise rotation by pi/2.
inline Vec2 hodge(const Vec2& v) { return {-v.y(), v.x()}; }

Tdoa3 tdoa_map_full(const SensorConfig& cfg, const Vec2& x);
Tdoa2 tdoa_map(const SensorConfig& cfg, const Vec2& x);

ConicCoefficients conic_coefficients(const SensorConfig& cfg, const Tdoa2& t);

/// b^2 - a*c, evaluated in factored form (product of the facet slacks over 4).
double preimage_discriminant(const SensorConfig& cfg, const Tdoa2& t);

LineValues line_values(const SensorConfig& cfg, const Tdoa2& t);

/// The six slacks of the triangle inequalities, ordered
/// {d10 - t10, d10 + t10, d20 - t20, d20 + t20, d21 - (t20 - t10), d21 + (t20 - t10)}.
std::array<double, 6> polytope_slacks(const SensorConfig& cfg, const Tdoa2& t);

/// Closed: every slack >= -eps. Open: every slack > eps.
bool polytope_membership(const SensorConfig& cfg, const Tdoa2& t, Strictness s);

/// t in the open hexagon and (a < 0 or b > 0).
bool in_U(const SensorConfig& cfg, const Tdoa2& t);

/// t in the open hexagon, a > 0 and l_i > 0.
bool in_Ui(const SensorConfig& cfg, const Tdoa2& t, int i);

/// Jacobian expression *(~d1^~d0 - ~d2^~d0 + ~d2^~d1) at x (dimensionless).
/// Zero exactly on the degeneracy locus, negative on Omega.
double jacobian_expression(const SensorConfig& cfg, const Vec2& x);

Region region_classify(const SensorConfig& cfg, const Vec2& x);

/// Inverse branch that parametrizes the given region (plus for Omega).
Branch branch_for(Region r);

/// Preimage m0 + l0(t) + lambda(t) v(t) on the requested branch.
/// Throws std::domain_error when t has no real preimage.
Preimage inverse_map(const SensorConfig& cfg, const Tdoa2& t, Branch branch);

/// Key-value sensor file: keys m0x, m0y, m1x, m1y, m2x, m2y, one per line.
SensorConfig read_sensor_config(std::istream& in);
SensorConfig read_sensor_config_file(const std::string& path);
void write_sensor_config(std::ostream& out, const SensorConfig& cfg);

}  // namespace tdoa
