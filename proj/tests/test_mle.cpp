#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tdoa/mle.hpp"

using namespace tdoa;

namespace {

const Metric2 kIdentity = Metric2(Mat2::Identity());
constexpr ModelId kModels[] = {ModelId::M, ModelId::M0, ModelId::M1, ModelId::M2};

int oracle_index(ModelId m) { return m == ModelId::M ? -1 : static_cast<int>(m) - 1; }

}  // namespace

TEST(LogLikelihood, Examples) {
  const Tdoa2 t{0.3, -0.2};
  const double peak = log_likelihood(kIdentity, t, t);
  EXPECT_NEAR(peak, -std::log(2.0 * M_PI), 1e-15);
  EXPECT_NEAR(log_likelihood(kIdentity, {1.3, -0.2}, t), peak - 0.5, 1e-15);
  Mat2 s;
  s << 0.5, 0.1, 0.1, 0.3;
  const Metric2 m(s);
  EXPECT_NEAR(log_likelihood(m, t, t), -std::log(2.0 * M_PI * std::sqrt(s.determinant())), 1e-14);
  EXPECT_GT(log_likelihood(m, {0.4, -0.2}, t), log_likelihood(m, {0.6, -0.2}, t));
}

TEST(Chi2, Threshold) {
  EXPECT_NEAR(chi2_threshold(0.05, 1), 3.8414588206941, 1e-9);
  EXPECT_NEAR(chi2_threshold(0.05, 2), 5.9914645471080, 1e-9);
  EXPECT_THROW(chi2_threshold(0.0, 1), std::invalid_argument);
}

TEST(Restricted, NoiselessInteriorEchoesSource) {
  const auto cfg = canonical_config();
  const Vec2 x(1, 1);
  const Estimate e = mle_restricted(cfg, Metric2::isotropic(0.005), tdoa_map(cfg, x), ModelId::M);
  EXPECT_EQ(e.kind, CandidateKind::Interior);
  EXPECT_EQ(e.lrt_stat, 0.0);
  ASSERT_TRUE(std::holds_alternative<Vec2>(e.location));
  EXPECT_LT((std::get<Vec2>(e.location) - x).norm(), 1e-9);
}

TEST(Restricted, BeyondVertexGivesSensor) {
  const auto cfg = canonical_config();
  const Tdoa2 t = Tdoa2::from(cfg.vertex(0).vec() + Vec2(1, 1));
  // Normal-cone test: (1,1) has non-negative components along both outward facet normals at R0.
  ASSERT_GE(Vec2(1, 1).dot(Vec2(1, 0)), 0.0);
  ASSERT_GE(Vec2(1, 1).dot(Vec2(0, 1)), 0.0);
  const Estimate e = mle_restricted(cfg, kIdentity, t, ModelId::M);
  EXPECT_EQ(e.kind, CandidateKind::Vertex);
  EXPECT_EQ(e.tau_bar.vec(), cfg.vertex(0).vec());
  ASSERT_TRUE(std::holds_alternative<SensorVertex>(e.location));
  EXPECT_EQ(std::get<SensorVertex>(e.location).index, 0);
  EXPECT_NEAR(e.lrt_stat, 2.0, 1e-12);
}

TEST(Restricted, MatchesBoundaryOracle) {
  const auto cfg = canonical_config();
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::vector<oracle::ModelBoundary> bounds;
  for (ModelId m : kModels) bounds.push_back(oracle::sample_boundary(cfg, oracle_index(m), 100000));
  for (int k = 0; k < 200; ++k) {
    const Mat2 s = oracle::random_spd(rng, 0.2, 3.0);
    const Metric2 metric(s);
    const Vec2 t(u(rng), u(rng));
    for (std::size_t mi = 0; mi < 4; ++mi) {
      const ModelId m = kModels[mi];
      const Estimate e = mle_restricted(cfg, metric, Tdoa2::from(t), m);
      const int idx = oracle_index(m);
      const double ref = oracle::in_model(cfg, idx, t) ? 0.0 : oracle::min_distance2(bounds[mi], metric.inv(), t);
      EXPECT_LE(e.lrt_stat, ref + 1e-6) << to_string(m) << " at " << t.transpose();
      EXPECT_TRUE(oracle::in_model_closure(cfg, idx, e.tau_bar.vec(), 1e-7)) << to_string(m) << " " << t.transpose();
      EXPECT_NEAR(e.lrt_stat, metric.dist2(Tdoa2::from(t), e.tau_bar), 1e-12 * (1.0 + e.lrt_stat));
    }
  }
}

TEST(Restricted, IdempotentAndGeometryConsistent) {
  const auto cfg = SensorConfig({0.3, -0.2}, {3.1, 0.4}, {1.2, 2.7});
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 300; ++k) {
    const Metric2 metric(oracle::random_spd(rng, 0.2, 3.0));
    const Tdoa2 t{u(rng), u(rng)};
    for (ModelId m : kModels) {
      const Estimate e = mle_restricted(cfg, metric, t, m);
      const Estimate again = mle_restricted(cfg, metric, e.tau_bar, m);
      EXPECT_LT(again.lrt_stat, 1e-12);
      EXPECT_LT((again.tau_bar.vec() - e.tau_bar.vec()).norm(), 1e-9);
      if (const auto* p = std::get_if<Vec2>(&e.location)) {
        EXPECT_LT((tdoa_map(cfg, *p).vec() - e.tau_bar.vec()).norm(), 1e-8 * std::max(1.0, p->norm()))
            << to_string(m) << ' ' << e.candidate;
      } else if (const auto* s = std::get_if<SensorVertex>(&e.location)) {
        EXPECT_EQ(e.tau_bar.vec(), cfg.vertex(s->index).vec());
      } else {
        EXPECT_NE(e.kind, CandidateKind::Vertex);
        EXPECT_NEAR(conic_coefficients(cfg, e.tau_bar).a, 0.0, 1e-9);
      }
    }
  }
}

TEST(Restricted, CuspAtTouchPoint) {
  // Nearest point of M0's closure is the touch point T0+, where the boundary turns back.
  const auto cfg = canonical_config();
  Mat2 s;
  s << 2.22645, -0.585755, -0.585755, 1.94617;
  const Metric2 metric(s);
  const Vec2 t(-5.03036, 1.96861);
  const auto b = oracle::sample_boundary(cfg, 0, 100000);
  const Estimate e = mle_restricted(cfg, metric, Tdoa2::from(t), ModelId::M0);
  EXPECT_EQ(e.candidate, "T0+");
  EXPECT_LT((e.tau_bar.vec() - oracle::corner_touch(cfg, 0).first).norm(), 1e-6);
  EXPECT_NEAR(e.lrt_stat, oracle::min_distance2(b, metric.inv(), t), 1e-6);
}

TEST(Blind, InteriorAccepted) {
  const auto cfg = canonical_config();
  const auto all = mle_blind(cfg, Metric2::isotropic(0.005), tdoa_map(cfg, {1, 1}));
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0].model, ModelId::M);
  EXPECT_TRUE(all[0].accepted);
  EXPECT_EQ(all[0].lrt_stat, 0.0);
}

TEST(Blind, AllRejectedAboveThreshold) {
  const auto cfg = canonical_config();
  const Tdoa2 far{20, 20};
  const auto all = mle_blind(cfg, kIdentity, far);
  for (const auto& e : all) {
    EXPECT_GE(e.lrt_stat, 5.0);
    EXPECT_FALSE(e.accepted);
  }
  // Threshold comparison itself.
  const auto cut = mle_blind_threshold(cfg, kIdentity, {2.5, 2.8284271247461903}, 0.2);
  EXPECT_NEAR(cut[0].lrt_stat, 0.25, 1e-12);
  EXPECT_FALSE(cut[0].accepted);
}

TEST(Blind, OverlapOfU0AndU) {
  const auto cfg = canonical_config();
  const Vec2 x(-2.0, -1.0);
  ASSERT_EQ(region_classify(cfg, x), Region::Omega0);
  const Tdoa2 t = tdoa_map(cfg, x);
  const auto all = mle_blind(cfg, Metric2::isotropic(0.01), t);
  EXPECT_TRUE(all[1].accepted);
  EXPECT_EQ(all[1].lrt_stat, 0.0);
  EXPECT_LT((std::get<Vec2>(all[1].location) - x).norm(), 1e-9);
  // M is decided by its own projection distance.
  const Estimate m = mle_restricted(cfg, Metric2::isotropic(0.01), t, ModelId::M);
  EXPECT_EQ(all[0].lrt_stat, m.lrt_stat);
  EXPECT_EQ(all[0].accepted, m.lrt_stat < chi2_threshold(0.05, 1));
}

TEST(Models, Labels) {
  EXPECT_EQ(parse_model("M2"), ModelId::M2);
  EXPECT_FALSE(parse_model("M3").has_value());
  EXPECT_EQ(model_for(Region::Omega1), ModelId::M1);
  EXPECT_THROW(model_for(Region::DegeneracyLocus), std::invalid_argument);
}
