#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdoa/geometry.hpp"
#include "tdoa/statmodel.hpp"

namespace tdoa {

enum class Policy { Oracle, Blind };

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;

  /// Inclusive uniform spacing; a single node sits at lo.
  double at(int k) const { return count == 1 ? lo : lo + (hi - lo) * k / (count - 1); }
};

struct CampaignSpec {
  SensorConfig cfg = canonical_config();
  NoiseModel noise = reduced_noise(Mat2::Identity());
  GridAxis grid_x;
  GridAxis grid_y;
  std::size_t trials = 500;
  Policy policy = Policy::Oracle;
  double alpha = 0.05;
  int df = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  std::string out = "-";
};

/// Keys: sensors, sigma, grid_x, grid_y, trials, policy, seed, out
/// (optional: alpha, df, threads). See README for the grammar.
CampaignSpec read_campaign_spec(std::istream& in);
CampaignSpec read_campaign_spec_file(const std::string& path);

struct CampaignRow {
  double x = 0.0;
  double y = 0.0;
  std::string status;  // "ok" or the reason the point was skipped
  std::size_t n_effective = 0;
  std::size_t n_ideal = 0;     // estimates at infinity, excluded from moments
  std::size_t n_rejected = 0;  // blind policy: no model accepted
  std::size_t n_disagree = 0;  // blind policy: selected model differs from the true one
  std::size_t n_failed = 0;    // trials whose estimator raised a numerical error
  Mat2 covariance;             // about the sample mean
  Mat2 mse;                    // about the true source
  Vec2 sample_bias;            // mean(xbar) - x
  Vec2 ginv_eig;
  Vec2 radial;
  Vec2 transverse;
  Vec2 pred_bias;  // -b/2
  Mat2 delta;
};

/// One grid point, stream = grid index. Used by run_campaign.
CampaignRow run_point(const CampaignSpec& spec, const Vec2& x, std::uint64_t stream);

/// Row-major over (grid_y outer, grid_x inner); deterministic for any thread count.
std::vector<CampaignRow> run_campaign(const CampaignSpec& spec);

void write_campaign_csv(std::ostream& out, const std::vector<CampaignRow>& rows);

}  // namespace tdoa
