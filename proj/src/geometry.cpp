#include "tdoa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "tdoa/kv_file.hpp"

namespace tdoa {

namespace {

// Below this relative size |a| / W^2 the diverging root is reported as a
// point at infinity.
constexpr double kIdealTol = 1e-12;

// Collinearity rejection: |W| / aperture^2.
constexpr double kCollinearTol = 1e-9;

double angle_between(const Vec2& u, const Vec2& v) {
  return std::atan2(std::abs(wedge_star(u, v)), u.dot(v));
}

}  // namespace

const char* to_string(Region r) {
  switch (r) {
    case Region::Omega: return "Omega";
    case Region::Omega0: return "Omega0";
    case Region::Omega1: return "Omega1";
    case Region::Omega2: return "Omega2";
    case Region::DegeneracyLocus: return "DegeneracyLocus";
  }
  return "?";
}

SensorConfig::SensorConfig(const Vec2& m0, const Vec2& m1, const Vec2& m2) : m_{m0, m1, m2} {
  if (!m0.allFinite() || !m1.allFinite() || !m2.allFinite()) {
    throw std::invalid_argument("sensor coordinates must be finite");
  }
  if (wedge_star(m1 - m0, m2 - m0) < 0.0) {
    std::swap(m_[1], m_[2]);
    swapped_ = true;
  }
  d10_ = m_[1] - m_[0];
  d20_ = m_[2] - m_[0];
  d21_ = m_[2] - m_[1];
  n10_ = d10_.norm();
  n20_ = d20_.norm();
  n21_ = d21_.norm();
  aperture_ = std::max({n10_, n20_, n21_});
  wedge_ = wedge_star(d10_, d20_);
  if (aperture_ == 0.0 || wedge_ < kCollinearTol * aperture_ * aperture_) {
    throw std::invalid_argument("sensors are collinear or coincident");
  }
  eps_ = 1e-9 * aperture_;
  alpha_ = angle_between(d10_, d20_);
  beta_ = angle_between(-d10_, d21_);
  gamma_ = angle_between(-d20_, -d21_);
}

Tdoa2 SensorConfig::vertex(int i) const {
  switch (i) {
    case 0: return {n10_, n20_};
    case 1: return {-n10_, n21_ - n10_};
    case 2: return {n21_ - n20_, -n20_};
    default: throw std::out_of_range("vertex index");
  }
}

Tdoa2 SensorConfig::tangency(int i, bool plus) const {
  Vec2 dir;
  switch (i) {
    case 0: dir = d21_ / n21_; break;
    case 1: dir = d20_ / n20_; break;
    case 2: dir = d10_ / n10_; break;
    default: throw std::out_of_range("tangency index");
  }
  const double s = plus ? 1.0 : -1.0;
  return {s * d10_.dot(dir), s * d20_.dot(dir)};
}

Tdoa2 SensorConfig::to_internal(const Tdoa2& user) const {
  return swapped_ ? Tdoa2{user.tau20, user.tau10} : user;
}

int SensorConfig::user_sensor(int internal) const {
  if (!swapped_ || internal == 0) return internal;
  return 3 - internal;
}

SensorConfig canonical_config() { return {{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}}; }

Tdoa3 tdoa_map_full(const SensorConfig& cfg, const Vec2& x) {
  const double r0 = (x - cfg.sensor(0)).norm();
  const double r1 = (x - cfg.sensor(1)).norm();
  const double r2 = (x - cfg.sensor(2)).norm();
  return {r1 - r0, r2 - r0, r2 - r1};
}

Tdoa2 tdoa_map(const SensorConfig& cfg, const Vec2& x) { return tdoa_map_full(cfg, x).reduced(); }

ConicCoefficients conic_coefficients(const SensorConfig& cfg, const Tdoa2& t) {
  const Vec2& d10 = cfg.disp10();
  const Vec2& d20 = cfg.disp20();
  const double w = cfg.wedge();
  ConicCoefficients k;
  k.v = hodge(t.tau20 * d10 - t.tau10 * d20);
  const double s20 = cfg.d20() * cfg.d20() - t.tau20 * t.tau20;
  const double s10 = cfg.d10() * cfg.d10() - t.tau10 * t.tau10;
  k.l0 = hodge(s20 * d10 - s10 * d20) / (2.0 * w);
  k.a = k.v.squaredNorm() - w * w;
  k.b = k.v.dot(k.l0);
  k.c = k.l0.squaredNorm();
  return k;
}

std::array<double, 6> polytope_slacks(const SensorConfig& cfg, const Tdoa2& t) {
  const double t21 = t.tau20 - t.tau10;
  return {cfg.d10() - t.tau10, cfg.d10() + t.tau10, cfg.d20() - t.tau20,
          cfg.d20() + t.tau20, cfg.d21() - t21,     cfg.d21() + t21};
}

double preimage_discriminant(const SensorConfig& cfg, const Tdoa2& t) {
  const auto s = polytope_slacks(cfg, t);
  return 0.25 * (s[0] * s[1]) * (s[2] * s[3]) * (s[4] * s[5]);
}

LineValues line_values(const SensorConfig& cfg, const Tdoa2& t) {
  const double d10 = cfg.d10(), d20 = cfg.d20(), d21 = cfg.d21();
  return {
      d20 * t.tau10 + d10 * t.tau20 - d10 * d20 * (1.0 + std::cos(cfg.alpha())),
      -(d10 + d21) * t.tau10 + d10 * t.tau20 - d10 * d21 * (1.0 + std::cos(cfg.beta())),
      d20 * t.tau10 - (d20 + d21) * t.tau20 - d20 * d21 * (1.0 + std::cos(cfg.gamma())),
  };
}

bool polytope_membership(const SensorConfig& cfg, const Tdoa2& t, Strictness s) {
  const double eps = cfg.eps();
  for (double slack : polytope_slacks(cfg, t)) {
    if (s == Strictness::Open ? !(slack > eps) : !(slack >= -eps)) return false;
  }
  return true;
}

bool in_U(const SensorConfig& cfg, const Tdoa2& t) {
  if (!polytope_membership(cfg, t, Strictness::Open)) return false;
  const auto k = conic_coefficients(cfg, t);
  return k.a < 0.0 || k.b > 0.0;
}

bool in_Ui(const SensorConfig& cfg, const Tdoa2& t, int i) {
  if (!polytope_membership(cfg, t, Strictness::Open)) return false;
  const auto k = conic_coefficients(cfg, t);
  return k.a > 0.0 && line_values(cfg, t)[static_cast<std::size_t>(i)] > 0.0;
}

double jacobian_expression(const SensorConfig& cfg, const Vec2& x) {
  const Vec2 u0 = (x - cfg.sensor(0)).normalized();
  const Vec2 u1 = (x - cfg.sensor(1)).normalized();
  const Vec2 u2 = (x - cfg.sensor(2)).normalized();
  return wedge_star(u1, u0) - wedge_star(u2, u0) + wedge_star(u2, u1);
}

Region region_classify(const SensorConfig& cfg, const Vec2& x) {
  const Vec2 r0 = x - cfg.sensor(0);
  const Vec2 r1 = x - cfg.sensor(1);
  const Vec2 r2 = x - cfg.sensor(2);
  if (std::min({r0.norm(), r1.norm(), r2.norm()}) < cfg.eps()) return Region::DegeneracyLocus;

  const double jac = jacobian_expression(cfg, x);
  if (std::abs(jac) < 1e-9) return Region::DegeneracyLocus;
  if (jac < 0.0) return Region::Omega;

  const double s10 = wedge_star(r1, r0);
  const double s20 = wedge_star(r2, r0);
  const double s21 = wedge_star(r2, r1);
  if (s10 > 0.0 && s20 < 0.0) return Region::Omega0;
  if (s10 > 0.0 && s21 > 0.0) return Region::Omega1;
  if (s20 < 0.0 && s21 > 0.0) return Region::Omega2;
  return Region::DegeneracyLocus;
}

Branch branch_for(Region r) { return r == Region::Omega ? Branch::Plus : Branch::Minus; }

Preimage inverse_map(const SensorConfig& cfg, const Tdoa2& t, Branch branch) {
  if (!polytope_membership(cfg, t, Strictness::Closed)) {
    throw std::domain_error("tau outside the feasible hexagon: no real preimage");
  }
  const auto k = conic_coefficients(cfg, t);
  const double sq = std::sqrt(std::max(preimage_discriminant(cfg, t), 0.0));

  // Stable root pair: q/a carries the large root, c/q the small one.
  // For b >= 0, q/a is lambda_-; for b < 0 it is lambda_+.
  const double q = -(k.b + std::copysign(sq, k.b));
  const bool diverging = (branch == Branch::Plus) == (k.b < 0.0);

  double lambda = 0.0;
  if (q == 0.0) {
    lambda = 0.0;
  } else if (diverging) {
    if (std::abs(k.a) <= kIdealTol * cfg.wedge() * cfg.wedge()) {
      const double nv = k.v.norm();
      if (nv == 0.0) throw std::domain_error("degenerate direction at infinity");
      return IdealDirection{-k.v / nv};
    }
    lambda = q / k.a;
  } else {
    lambda = k.c / q;
  }
  // lambda = -d0 / W for a genuine preimage.
  if (-lambda * cfg.wedge() < -cfg.eps()) {
    throw std::domain_error("tau has no preimage on the requested branch");
  }
  return Vec2(cfg.sensor(0) + k.l0 + lambda * k.v);
}

SensorConfig read_sensor_config(std::istream& in) {
  const auto entries = parse_kv(in);
  std::map<std::string, double> vals;
  for (const auto& e : entries) {
    static const char* const kKeys[] = {"m0x", "m0y", "m1x", "m1y", "m2x", "m2y"};
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return e.key == k; }) ==
        std::end(kKeys)) {
      throw ParseError(e.key, e.line, "unknown key");
    }
    vals[e.key] = parse_numbers(e, 1)[0];
  }
  for (const char* k : {"m0x", "m0y", "m1x", "m1y", "m2x", "m2y"}) {
    if (!vals.count(k)) throw ParseError(k, 0, "missing key");
  }
  return {{vals["m0x"], vals["m0y"]}, {vals["m1x"], vals["m1y"]}, {vals["m2x"], vals["m2y"]}};
}

SensorConfig read_sensor_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open sensor config '" + path + "'");
  return read_sensor_config(f);
}

void write_sensor_config(std::ostream& out, const SensorConfig& cfg) {
  const auto old = out.precision(17);
  for (int user = 0; user < 3; ++user) {
    const Vec2& m = cfg.sensor(cfg.user_sensor(user));
    out << 'm' << user << "x = " << m.x() << '\n' << 'm' << user << "y = " << m.y() << '\n';
  }
  out.precision(old);
}

}  // namespace tdoa
