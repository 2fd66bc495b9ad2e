#include "tdoa/mle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>
#include <boost/math/distributions/chi_squared.hpp>

namespace tdoa {

namespace {

struct Candidate {
  Tdoa2 point;
  double distance2;
  CandidateKind kind;
  std::string name;
  int vertex = -1;
};

Location locate(const SensorConfig& cfg, const Candidate& c, Branch branch) {
  switch (c.kind) {
    case CandidateKind::Vertex:
      return SensorVertex{c.vertex};
    case CandidateKind::Ellipse: {
      const Vec2 v = conic_coefficients(cfg, c.point).v;
      return IdealDirection{-v / v.norm()};
    }
    case CandidateKind::Interior:
    case CandidateKind::Facet:
      break;
  }
  Preimage p;
  try {
    p = inverse_map(cfg, c.point, branch);
  } catch (const std::domain_error&) {
    // Facet points that are also touch points have only an ideal preimage.
    const auto k = conic_coefficients(cfg, c.point);
    if (std::abs(k.a) > 1e-9 * cfg.wedge() * cfg.wedge()) throw;
    return IdealDirection{-k.v / k.v.norm()};
  }
  if (const auto* d = std::get_if<IdealDirection>(&p)) return *d;
  return std::get<Vec2>(p);
}

}  // namespace

const char* to_string(ModelId m) {
  switch (m) {
    case ModelId::M: return "M";
    case ModelId::M0: return "M0";
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
  }
  return "?";
}

std::optional<ModelId> parse_model(const std::string& s) {
  for (ModelId m : {ModelId::M, ModelId::M0, ModelId::M1, ModelId::M2}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

ModelId model_for(Region r) {
  switch (r) {
    case Region::Omega: return ModelId::M;
    case Region::Omega0: return ModelId::M0;
    case Region::Omega1: return ModelId::M1;
    case Region::Omega2: return ModelId::M2;
    case Region::DegeneracyLocus: break;
  }
  throw std::invalid_argument("no model on the degeneracy locus");
}

const char* to_string(CandidateKind k) {
  switch (k) {
    case CandidateKind::Interior: return "interior";
    case CandidateKind::Facet: return "facet";
    case CandidateKind::Ellipse: return "ellipse";
    case CandidateKind::Vertex: return "vertex";
  }
  return "?";
}

double log_likelihood(const Metric2& metric, const Tdoa2& t_hat, const Tdoa2& tau) {
  const double det = metric.sigma2().determinant();
  return -std::log(2.0 * std::numbers::pi * std::sqrt(det)) - 0.5 * metric.dist2(t_hat, tau);
}

Estimate mle_restricted(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t_hat, ModelId model) {
  const bool whole = model == ModelId::M;
  const int idx = whole ? -1 : static_cast<int>(model) - 1;
  const Branch branch = whole ? Branch::Plus : Branch::Minus;

  Estimate est;
  est.model = model;

  const bool interior = whole ? in_U(cfg, t_hat) : in_Ui(cfg, t_hat, idx);
  if (interior) {
    const Candidate c{t_hat, 0.0, CandidateKind::Interior, "interior"};
    est.tau_bar = t_hat;
    est.kind = c.kind;
    est.candidate = c.name;
    est.location = locate(cfg, c, branch);
    return est;
  }

  // Enumerated in tie-break priority order; a later candidate replaces the
  // incumbent only when strictly closer.
  std::vector<Candidate> cands;
  for (const auto& f : project_facets(cfg, metric, t_hat)) {
    if (!f.on_boundary_of_model) continue;
    if (!whole && f.vertex != idx) continue;
    cands.push_back({f.point, f.distance2, CandidateKind::Facet, f.name()});
  }
  const double b_tol = cfg.eps() * cfg.aperture() * cfg.aperture();
  const double l_tol = cfg.eps() * cfg.aperture();
  const auto ell = project_ellipse(cfg, metric, t_hat);
  for (std::size_t k = 0; k < ell.size(); ++k) {
    const auto& e = ell[k];
    const bool keep = whole ? conic_coefficients(cfg, e.point).b <= b_tol
                            : line_values(cfg, e.point)[static_cast<std::size_t>(idx)] >= -l_tol;
    if (keep) cands.push_back({e.point, e.distance2, CandidateKind::Ellipse, "E" + std::to_string(k)});
  }
  // Touch points are cusps of the boundary of M_i, so they can be nearest
  // without being stationary on either adjoining piece.
  for (int i = 0; i < 3; ++i) {
    if (!whole && i != idx) continue;
    for (bool plus : {true, false}) {
      const Tdoa2 p = touch_point(cfg, i, plus);
      cands.push_back({p, metric.dist2(t_hat, p), CandidateKind::Ellipse, "T" + std::to_string(i) + (plus ? "+" : "-")});
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (!whole && i != idx) continue;
    const Tdoa2 r = cfg.vertex(i);
    cands.push_back({r, metric.dist2(t_hat, r), CandidateKind::Vertex, "R" + std::to_string(i), i});
  }

  const Candidate* best = &cands.front();
  for (const auto& c : cands) {
    const double tol = 1e-12 * std::max(1.0, best->distance2);
    if (c.distance2 < best->distance2 - tol) best = &c;
  }
  est.tau_bar = best->point;
  est.lrt_stat = best->distance2;
  est.kind = best->kind;
  est.candidate = best->name;
  est.location = locate(cfg, *best, branch);
  return est;
}

double chi2_threshold(double alpha_level, int df) {
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (df < 1) throw std::invalid_argument("degrees of freedom must be positive");
  const boost::math::chi_squared dist(df);
  return boost::math::quantile(boost::math::complement(dist, alpha_level));
}

std::vector<Estimate> mle_blind(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t_hat,
                                double alpha_level, int df) {
  return mle_blind_threshold(cfg, metric, t_hat, chi2_threshold(alpha_level, df));
}

std::vector<Estimate> mle_blind_threshold(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t_hat,
                                          double threshold) {
  std::vector<Estimate> out;
  for (ModelId m : {ModelId::M, ModelId::M0, ModelId::M1, ModelId::M2}) {
    auto e = mle_restricted(cfg, metric, t_hat, m);
    e.accepted = e.lrt_stat < threshold;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace tdoa
