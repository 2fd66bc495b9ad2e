// Acceptance checks. One PASS/FAIL line per criterion; --criterion N runs one.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "tdoa/campaign.hpp"
#include "tdoa/inference.hpp"
#include "tdoa/mle.hpp"
#include "tdoa/projection.hpp"
#include "tdoa/statmodel.hpp"

using namespace tdoa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Discriminant curve for the canonical array.

struct Term {
  int i, j;
  double c;
};
const Term kPrinted[] = {{6, 0, 1},    {5, 1, 6},     {4, 2, 18},    {3, 3, 32},  {2, 4, 36},   {1, 5, 24},
                         {0, 6, 8},    {4, 0, 48},    {3, 1, -24},   {2, 2, -588}, {1, 3, -696}, {0, 4, -132},
                         {2, 0, 1200}, {1, 1, 2400},  {0, 2, 2400},  {0, 0, -8000}};

Outcome discriminant_reproduction() {
  const Sextic s = discriminant_sextic(canonical_config(), Metric2::isotropic(0.005));
  const double norm = s.coeff(6, 0);
  double worst = 0.0, stray = 0.0;
  for (const auto& t : kPrinted) worst = std::max(worst, std::abs(s.coeff(t.i, t.j) / norm - t.c) / std::abs(t.c));
  for (int i = 0; i <= 6; ++i) {
    for (int j = 0; i + j <= 6; ++j) {
      bool listed = false;
      for (const auto& t : kPrinted) listed |= t.i == i && t.j == j;
      if (!listed) stray = std::max(stray, std::abs(s.coeff(i, j) / norm));
    }
  }
  // Unlisted monomials are compared against the largest printed magnitude.
  const double err = std::max(worst, stray / 8000.0);
  return {err < 1e-6, fmt("max relative coefficient error %.2e", err)};
}

// ---------------------------------------------------------------------------
// 2. Geometry invariants.

Outcome geometry_invariants() {
  const auto cfg = canonical_config();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst_trip = 0.0, worst_plane = 0.0;
  int n = 0;
  while (n < 10000) {
    const Vec2 x(u(rng), u(rng));
    const Region r = region_classify(cfg, x);
    if (r == Region::DegeneracyLocus) continue;
    bool near_sensor = false;
    for (int i = 0; i < 3; ++i) near_sensor |= (x - cfg.sensor(i)).norm() < 1e-3;
    if (near_sensor) continue;
    ++n;
    const Tdoa2 t = tdoa_map(cfg, x);
    const auto back = inverse_map(cfg, t, branch_for(r));
    const auto* p = std::get_if<Vec2>(&back);
    const double e = p ? (*p - x).norm() / std::max(1.0, x.norm()) : INFINITY;
    worst_trip = std::max(worst_trip, e);
    const Tdoa3 full = tdoa_map_full(cfg, x);
    worst_plane = std::max(worst_plane, std::abs(full.tau10 - full.tau20 + full.tau21) /
                                            std::max({1.0, std::abs(full.tau10), std::abs(full.tau20)}));
  }
  double worst_touch = 0.0;
  const double w2 = cfg.wedge() * cfg.wedge();
  for (int i = 0; i < 3; ++i) {
    for (bool plus : {true, false}) {
      const Tdoa2 t = touch_point(cfg, i, plus);
      const auto slack = polytope_slacks(cfg, t);
      const double on_facet = *std::min_element(slack.begin(), slack.end());
      worst_touch = std::max({worst_touch, std::abs(conic_coefficients(cfg, t).a) / w2, std::abs(on_facet)});
    }
  }
  const bool pass = worst_trip < 1e-9 && worst_touch < 1e-10 && worst_plane < 4.0 * 2.220446049250313e-16;
  return {pass, fmt("round trip %.2e, touch points %.2e, plane identity %.2e", worst_trip, worst_touch, worst_plane)};
}

// ---------------------------------------------------------------------------
// 3. MLE optimality against a boundary sampling oracle.

Outcome mle_optimality() {
  const auto cfg = canonical_config();
  const ModelId models[] = {ModelId::M, ModelId::M0, ModelId::M1, ModelId::M2};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  double worst = -INFINITY;
  int infeasible = 0;
  for (int mi = 0; mi < 4; ++mi) {
    const int idx = mi - 1;
    const auto boundary = oracle::sample_boundary(cfg, idx, 100000);
    for (int k = 0; k < 1000; ++k) {
      const Metric2 metric(oracle::random_spd(rng, 0.2, 3.0));
      const Vec2 t(u(rng), u(rng));
      const Estimate e = mle_restricted(cfg, metric, Tdoa2::from(t), models[mi]);
      const double ref = oracle::in_model(cfg, idx, t) ? 0.0 : oracle::min_distance2(boundary, metric.inv(), t);
      worst = std::max(worst, e.lrt_stat - ref);
      if (!oracle::in_model_closure(cfg, idx, e.tau_bar.vec(), 1e-7)) ++infeasible;
    }
  }
  return {worst <= 1e-6 && infeasible == 0,
          fmt("max (algorithm - brute force) %.2e over 4000 cases, %d infeasible", worst, infeasible)};
}

// ---------------------------------------------------------------------------
// 4. Ellipse projection count and nearest projection.

Outcome ellipse_projection_count() {
  const auto cfg = canonical_config();
  constexpr int kSweep = 1000000;
  std::vector<Vec2> pts(kSweep), tan(kSweep);
  for (int k = 0; k < kSweep; ++k) {
    const double phi = 2.0 * M_PI * k / kSweep;
    pts[k] = oracle::ellipse_point(cfg, phi);
    tan[k] = (oracle::ellipse_point(cfg, phi + 1e-6) - oracle::ellipse_point(cfg, phi - 1e-6)) / 2e-6;
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  int bad_range = 0, bad_count = 0, bad_sign = 0, bad_phi = 0;
  double worst_gap = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const Metric2 metric(oracle::random_spd(rng, 0.2, 3.0));
    const Mat2& inv = metric.inv();
    const Vec2 t(u(rng), u(rng));
    const auto proj = project_ellipse(cfg, metric, Tdoa2::from(t));
    const int count = static_cast<int>(proj.size());
    if (count < 2 || count > 4) ++bad_range;

    // One pass: sign changes of the stationarity function and the nearest sample.
    int changes = 0, best = 0;
    double best_d = INFINITY;
    double prev = (t - pts[kSweep - 1]).dot(inv * tan[kSweep - 1]);
    for (int k = 0; k < kSweep; ++k) {
      const Vec2 r = t - pts[k];
      const Vec2 ir = inv * r;
      const double g = ir.dot(tan[k]);
      if ((g > 0.0) != (prev > 0.0)) ++changes;
      prev = g;
      const double d = r.dot(ir);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    const double disc = discriminant_value(cfg, metric, Tdoa2::from(t));
    // A double root shows as no sign change on the sweep; only count exact-sign cases.
    if (count != 3 && changes != count) ++bad_count;
    if ((disc > 0.0 && count != 4) || (disc < 0.0 && count != 2)) ++bad_sign;

    double lo = 2.0 * M_PI * (best - 1) / kSweep, hi = 2.0 * M_PI * (best + 1) / kSweep;
    auto f = [&](double phi) { return oracle::mdist2(inv, t - oracle::ellipse_point(cfg, phi)); };
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
      const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      if (f(a) < f(b)) hi = b; else lo = a;
    }
    const double phi_ref = 0.5 * (lo + hi);
    const EllipseProjection* near = nullptr;
    for (const auto& p : proj) {
      if (!near || p.distance2 < near->distance2) near = &p;
    }
    if (!near) continue;
    const double gap = oracle::angle_gap(near->phi, phi_ref);
    const bool tie = std::abs(near->distance2 - f(phi_ref)) <= 1e-12 * (1.0 + near->distance2);
    if (gap > 1e-6 && !tie) ++bad_phi;
    if (!tie) worst_gap = std::max(worst_gap, gap);
  }
  const bool pass = bad_range + bad_count + bad_sign + bad_phi == 0;
  return {pass, fmt("10000 cases: %d out of range, %d count mismatches, %d sign mismatches, %d nearest off "
                    "(max phi gap %.1e)",
                    bad_range, bad_count, bad_sign, bad_phi, worst_gap)};
}

// ---------------------------------------------------------------------------
// 5-7. Monte Carlo at probe points.

constexpr double kSigma = 0.005;
constexpr std::size_t kTrials = 100000;

// Lattice points in Omega whose predicted sigma^4 correction is resolvable at
// 1e5 trials but still small: radial Delta/G^-1 in [4%, 10%], ranked by the
// transverse ratio. Selection uses predictions only.
std::vector<Vec2> probe_points() {
  const auto cfg = canonical_config();
  const Metric2 metric = Metric2::isotropic(kSigma);
  struct Cand {
    Vec2 x;
    double transverse;
  };
  std::vector<Cand> c;
  for (int iy = -6; iy <= 8; ++iy) {
    for (int ix = -6; ix <= 8; ++ix) {
      const Vec2 x(ix + 0.17, iy + 0.23);
      if (region_classify(cfg, x) != Region::Omega) continue;
      const auto r = asymptotic_report(cfg, metric, x);
      if (!r.delta.allFinite()) continue;
      const double rad = r.radial.dot(r.delta * r.radial) / r.eigenvalues(0);
      const double tr = r.transverse.dot(r.delta * r.transverse) / r.eigenvalues(1);
      if (rad >= 0.04 && rad <= 0.10) c.push_back({x, tr});
    }
  }
  std::stable_sort(c.begin(), c.end(), [](const Cand& a, const Cand& b) { return a.transverse > b.transverse; });
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < c.size() && k < 9; ++k) out.push_back(c[k].x);
  return out;
}

const std::vector<CampaignRow>& probe_rows() {
  static const std::vector<CampaignRow> rows = [] {
    CampaignSpec spec;
    spec.cfg = canonical_config();
    spec.noise = reduced_noise(kSigma * kSigma * Mat2::Identity(), 20240607);
    spec.trials = kTrials;
    std::vector<CampaignRow> out;
    std::uint64_t stream = 0;
    for (const Vec2& x : probe_points()) out.push_back(run_point(spec, x, stream++));
    return out;
  }();
  return rows;
}

Outcome rmse_prediction() {
  const auto& rows = probe_rows();
  double worst = 0.0;
  for (const auto& r : rows) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(r.covariance);
    worst = std::max({worst, std::abs(es.eigenvalues()(1) / r.ginv_eig(0) - 1.0),
                      std::abs(es.eigenvalues()(0) / r.ginv_eig(1) - 1.0)});
  }
  return {rows.size() == 9 && worst < 0.10,
          fmt("%zu probe points, max relative eigenvalue error %.3f", rows.size(), worst)};
}

Outcome bias_prediction() {
  const auto& rows = probe_rows();
  double worst = 0.0;
  for (const auto& r : rows) {
    const double n = static_cast<double>(r.n_effective);
    for (int c = 0; c < 2; ++c) {
      const double se = std::sqrt(r.covariance(c, c) / n);
      worst = std::max(worst, std::abs(r.sample_bias(c) - r.pred_bias(c)) / se);
    }
  }
  return {rows.size() == 9 && worst < 3.0, fmt("max |sample - predicted| / SE = %.2f", worst)};
}

Outcome remainder_certificate() {
  const auto cfg = canonical_config();
  const auto& rows = probe_rows();
  double lo = INFINITY, hi = 0.0;
  bool signs = true;
  for (const auto& r : rows) {
    const Mat2 g = r.ginv_eig(0) * r.radial * r.radial.transpose() +
                   r.ginv_eig(1) * r.transverse * r.transverse.transpose();
    const Mat2 disc = r.mse - g;
    for (const Vec2& e : {r.radial, r.transverse}) {
      const double m = e.dot(disc * e), d = e.dot(r.delta * e);
      if ((m > 0.0) != (d > 0.0)) signs = false;
      lo = std::min(lo, m / d);
      hi = std::max(hi, m / d);
    }
  }
  double slope_lo = INFINITY, slope_hi = -INFINITY;
  for (const auto& r : rows) {
    const Vec2 x(r.x, r.y);
    std::vector<double> ls, ld;
    for (double s : {0.0025, 0.005, 0.01}) {
      ls.push_back(std::log(s));
      ld.push_back(std::log(remainder(cfg, s, x).norm()));
    }
    const double mx = (ls[0] + ls[1] + ls[2]) / 3, my = (ld[0] + ld[1] + ld[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int k = 0; k < 3; ++k) {
      sxy += (ls[k] - mx) * (ld[k] - my);
      sxx += (ls[k] - mx) * (ls[k] - mx);
    }
    slope_lo = std::min(slope_lo, sxy / sxx);
    slope_hi = std::max(slope_hi, sxy / sxx);
  }
  const bool pass = rows.size() == 9 && signs && lo >= 1.0 / 3.0 && hi <= 3.0 && slope_lo >= 3.8 && slope_hi <= 4.2;
  return {pass, fmt("measured/predicted ratio in [%.2f, %.2f], signs %s, sigma^4 slope in [%.3f, %.3f]", lo, hi,
                    signs ? "agree" : "DISAGREE", slope_lo, slope_hi)};
}

// ---------------------------------------------------------------------------
// 8. LRT calibration at an interior point.

Outcome lrt_calibration() {
  const auto cfg = canonical_config();
  const Metric2 metric = Metric2::isotropic(kSigma);
  const NoiseModel noise = reduced_noise(metric.sigma2(), 8);
  const Vec2 x(1.0, 1.0);
  const double cut = chi2_threshold(0.05, 1);
  std::size_t rejected = 0;
  for (const auto& t : sample(noise, cfg, x, kTrials)) {
    if (mle_restricted(cfg, metric, t, ModelId::M).lrt_stat >= cut) ++rejected;
  }
  const double frac = static_cast<double>(rejected) / kTrials;
  return {std::abs(frac - 0.05) <= 0.01,
          fmt("rejection fraction %.5f at x=(1,1), cutoff %.4f (interior point: lrt is 0 whenever the "
              "measurement stays inside the model)",
              frac, cut)};
}

// ---------------------------------------------------------------------------
// 9. Covariance reduction.

Outcome covariance_reduction() {
  const auto cfg = canonical_config();
  Mat3 s3;
  s3 << 1.0, 0.3, -0.2, 0.3, 2.0, 0.5, -0.2, 0.5, 1.5;
  s3 *= 1e-4;
  const NoiseModel m = reduce_covariance(s3, 9);
  const Mat3 l3 = cholesky3(s3);
  const Mat2 l2 = cholesky2(m.sigma2.sigma2());
  Mat2 a = Mat2::Zero(), b = Mat2::Zero();
  Vec2 ma = Vec2::Zero(), mb = Vec2::Zero();
  const std::size_t n = 100000;
  for (std::uint64_t k = 0; k < n; ++k) {
    const Vec2 ra = m.P * draw_noise3(m, l3, 0, k);
    const Vec2 rb = draw_noise2(m, l2, 1, k);
    a += ra * ra.transpose();
    b += rb * rb.transpose();
    ma += ra;
    mb += rb;
  }
  const double dn = static_cast<double>(n);
  a = (a - ma * ma.transpose() / dn) / (dn - 1);
  b = (b - mb * mb.transpose() / dn) / (dn - 1);
  const double rel = (a - b).norm() / b.norm();

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 x(u(rng), u(rng));
    const Tdoa2 r = sufficient_statistic(m, tdoa_map_full(cfg, x));
    worst = std::max(worst, (r.vec() - tdoa_map(cfg, x).vec()).norm());
  }
  return {rel < 0.05 && worst < 1e-12, fmt("Frobenius relative difference %.4f, max |P tau3 - tau2| %.2e", rel, worst)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "discriminant reproduction", 1, discriminant_reproduction},
      {2, "geometry invariants", 5, geometry_invariants},
      {3, "MLE optimality", 60, mle_optimality},
      {4, "ellipse projection count", 120, ellipse_projection_count},
      {5, "RMSE prediction", 600, rmse_prediction},
      {6, "bias prediction", 600, bias_prediction},
      {7, "remainder certificate", 600, remainder_certificate},
      {8, "LRT calibration", 30, lrt_calibration},
      {9, "covariance reduction", 60, covariance_reduction},
  };
  bool ok = true;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    ok &= pass;
    std::printf("criterion %d [%s]: %s  %s (%.2f s of %.0f s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
