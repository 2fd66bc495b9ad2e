#include "tdoa/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "tdoa/error.hpp"
#include "tdoa/inference.hpp"
#include "tdoa/kv_file.hpp"
#include "tdoa/mle.hpp"

namespace tdoa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

GridAxis parse_axis(const KvEntry& e) {
  const auto v = parse_numbers(e, 3);
  GridAxis a{v[0], v[1], static_cast<int>(v[2])};
  if (!std::isfinite(a.lo) || !std::isfinite(a.hi)) throw ParseError(e.key, e.line, "range must be finite");
  if (v[2] != std::floor(v[2]) || a.count < 1) throw ParseError(e.key, e.line, "count must be a positive integer");
  return a;
}

NoiseModel parse_sigma(const KvEntry& e, std::uint64_t seed) {
  std::istringstream ss(e.value);
  std::string head;
  ss >> head;
  auto rest = [&](std::size_t n) {
    KvEntry tail{e.key, e.value.substr(e.value.find(head) + head.size()), e.line};
    return parse_numbers(tail, n);
  };
  try {
    if (head == "iso") {
      const double s = rest(1)[0];
      return reduce_covariance(s * s * Mat3::Identity(), seed);
    }
    if (head == "reduced_iso") {
      const double s = rest(1)[0];
      return reduced_noise(s * s * Mat2::Identity(), seed);
    }
    if (head == "reduced") {
      const auto v = rest(3);
      Mat2 m;
      m << v[0], v[1], v[1], v[2];
      return reduced_noise(m, seed);
    }
    const auto v = parse_numbers(e, 6);
    Mat3 m;
    m << v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5];
    return reduce_covariance(m, seed);
  } catch (const std::invalid_argument& ex) {
    throw ParseError(e.key, e.line, ex.what());
  }
}

struct Accumulator {
  std::vector<Vec2> xs;

  void finish(CampaignRow& row, const Vec2& truth) const {
    row.n_effective = xs.size();
    if (xs.empty()) return;
    Vec2 mean = Vec2::Zero();
    for (const auto& p : xs) mean += p;
    mean /= static_cast<double>(xs.size());
    Mat2 cov = Mat2::Zero();
    Mat2 mse = Mat2::Zero();
    for (const auto& p : xs) {
      cov += (p - mean) * (p - mean).transpose();
      mse += (p - truth) * (p - truth).transpose();
    }
    const double n = static_cast<double>(xs.size());
    row.covariance = xs.size() > 1 ? Mat2(cov / (n - 1.0)) : Mat2::Zero();
    row.mse = mse / n;
    row.sample_bias = mean - truth;
  }
};

}  // namespace

CampaignSpec read_campaign_spec(std::istream& in) {
  const auto entries = parse_kv(in);
  static const std::set<std::string> kKnown = {"sensors", "sigma", "grid_x", "grid_y", "trials", "policy",
                                               "seed",    "out",   "alpha",  "df",     "threads"};
  static const char* const kRequired[] = {"sensors", "sigma", "grid_x", "grid_y", "trials", "policy", "seed", "out"};
  std::map<std::string, KvEntry> by_key;
  for (const auto& e : entries) {
    if (!kKnown.count(e.key)) throw ParseError(e.key, e.line, "unknown key");
    by_key.emplace(e.key, e);
  }
  for (const char* k : kRequired) {
    if (!by_key.count(k)) throw ParseError(k, 0, "missing key");
  }

  CampaignSpec spec;
  {
    const auto& e = by_key.at("sensors");
    const auto v = parse_numbers(e, 6);
    try {
      spec.cfg = SensorConfig({v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]});
    } catch (const std::invalid_argument& ex) {
      throw ParseError(e.key, e.line, ex.what());
    }
  }
  {
    const auto& e = by_key.at("seed");
    const std::string& s = e.value;
    std::size_t pos = 0;
    unsigned long long seed = 0;
    try {
      seed = std::stoull(s, &pos, 0);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty() || s[0] == '-') throw ParseError(e.key, e.line, "expected an unsigned integer");
    spec.noise = parse_sigma(by_key.at("sigma"), seed);
  }
  spec.grid_x = parse_axis(by_key.at("grid_x"));
  spec.grid_y = parse_axis(by_key.at("grid_y"));
  {
    const auto& e = by_key.at("trials");
    const double t = parse_numbers(e, 1)[0];
    if (!(t >= 1.0) || t != std::floor(t)) throw ParseError(e.key, e.line, "trials must be a positive integer");
    spec.trials = static_cast<std::size_t>(t);
  }
  {
    const auto& e = by_key.at("policy");
    if (e.value == "oracle") {
      spec.policy = Policy::Oracle;
    } else if (e.value == "blind") {
      spec.policy = Policy::Blind;
    } else {
      throw ParseError(e.key, e.line, "expected 'oracle' or 'blind'");
    }
  }
  spec.out = by_key.at("out").value;
  if (auto it = by_key.find("alpha"); it != by_key.end()) {
    spec.alpha = parse_numbers(it->second, 1)[0];
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ParseError("alpha", it->second.line, "must lie in (0, 1)");
  }
  if (auto it = by_key.find("df"); it != by_key.end()) {
    const double d = parse_numbers(it->second, 1)[0];
    if (!(d >= 1.0) || d != std::floor(d)) throw ParseError("df", it->second.line, "must be a positive integer");
    spec.df = static_cast<int>(d);
  }
  if (auto it = by_key.find("threads"); it != by_key.end()) {
    const double d = parse_numbers(it->second, 1)[0];
    if (!(d >= 0.0) || d != std::floor(d)) throw ParseError("threads", it->second.line, "must be a non-negative integer");
    spec.threads = static_cast<unsigned>(d);
  }
  return spec;
}

CampaignSpec read_campaign_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open campaign spec '" + path + "'");
  return read_campaign_spec(f);
}

CampaignRow run_point(const CampaignSpec& spec, const Vec2& x, std::uint64_t stream) {
  const SensorConfig& cfg = spec.cfg;
  const Metric2& metric = spec.noise.sigma2;

  CampaignRow row;
  row.x = x.x();
  row.y = x.y();
  row.status = "ok";
  row.covariance = row.mse = row.delta = Mat2::Constant(kNaN);
  row.sample_bias = row.ginv_eig = row.radial = row.transverse = row.pred_bias = Vec2::Constant(kNaN);

  const Region region = region_classify(cfg, x);
  if (region == Region::DegeneracyLocus && spec.policy == Policy::Oracle) {
    row.status = "skipped_degeneracy_locus";
    return row;
  }

  try {
    const AsymptoticReport rep = asymptotic_report(cfg, metric, x);
    row.ginv_eig = rep.eigenvalues;
    row.radial = rep.radial;
    row.transverse = rep.transverse;
    row.pred_bias = rep.bias;
    row.delta = rep.delta;
  } catch (const std::exception&) {
    row.status = "no_prediction";
  }

  const Mat2 chol = cholesky2(metric.sigma2());
  const Vec2 t = tdoa_map(cfg, x).vec();
  const double threshold = chi2_threshold(spec.alpha, spec.df);
  const bool known = region != Region::DegeneracyLocus;
  const ModelId truth = known ? model_for(region) : ModelId::M;

  Accumulator acc;
  acc.xs.reserve(spec.trials);
  for (std::size_t k = 0; k < spec.trials; ++k) {
    const Tdoa2 t_hat = Tdoa2::from(t + draw_noise2(spec.noise, chol, stream, k));
    Estimate est;
    try {
      if (spec.policy == Policy::Oracle) {
        est = mle_restricted(cfg, metric, t_hat, truth);
      } else {
        const auto all = mle_blind_threshold(cfg, metric, t_hat, threshold);
        const Estimate* pick = nullptr;
        for (const auto& e : all) {
          if (e.accepted && (!pick || e.lrt_stat < pick->lrt_stat)) pick = &e;
        }
        if (!pick) {
          ++row.n_rejected;
          continue;
        }
        if (known && pick->model != truth) ++row.n_disagree;
        est = *pick;
      }
    } catch (const std::exception&) {
      ++row.n_failed;
      continue;
    }
    if (const auto* p = std::get_if<Vec2>(&est.location)) {
      acc.xs.push_back(*p);
    } else if (const auto* s = std::get_if<SensorVertex>(&est.location)) {
      acc.xs.push_back(cfg.sensor(s->index));
    } else {
      ++row.n_ideal;
    }
  }
  acc.finish(row, x);
  return row;
}

std::vector<CampaignRow> run_campaign(const CampaignSpec& spec) {
  const int nx = spec.grid_x.count;
  const int ny = spec.grid_y.count;
  const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  std::vector<CampaignRow> rows(total);

  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const int ix = static_cast<int>(i % static_cast<std::size_t>(nx));
      const int iy = static_cast<int>(i / static_cast<std::size_t>(nx));
      const Vec2 x(spec.grid_x.at(ix), spec.grid_y.at(iy));
      rows[i] = run_point(spec, x, i);
      if (rows[i].status != "ok") {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::clog << "campaign: point (" << x.x() << ", " << x.y() << "): " << rows[i].status << '\n';
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return rows;
}

void write_campaign_csv(std::ostream& out, const std::vector<CampaignRow>& rows) {
  const auto old = out.precision(17);
  out << "# tdoa campaign v1\n";
  out << "x,y,status,n_effective,n_ideal,n_rejected,n_disagree,n_failed,"
         "cov11,cov12,cov22,mse11,mse12,mse22,bias_x,bias_y,bias_r,bias_t,"
         "ginv_eig1,ginv_eig2,pred_bias_r,pred_bias_t,delta_eig1,delta_eig2,disc_eig1,disc_eig2\n";
  for (const auto& r : rows) {
    const Mat2 disc = r.mse - (r.ginv_eig(0) * r.radial * r.radial.transpose() +
                               r.ginv_eig(1) * r.transverse * r.transverse.transpose());
    out << r.x << ',' << r.y << ',' << r.status << ',' << r.n_effective << ',' << r.n_ideal << ',' << r.n_rejected
        << ',' << r.n_disagree << ',' << r.n_failed << ',' << r.covariance(0, 0) << ',' << r.covariance(0, 1) << ','
        << r.covariance(1, 1) << ',' << r.mse(0, 0) << ',' << r.mse(0, 1) << ',' << r.mse(1, 1) << ','
        << r.sample_bias.x() << ',' << r.sample_bias.y() << ',' << r.sample_bias.dot(r.radial) << ','
        << r.sample_bias.dot(r.transverse) << ',' << r.ginv_eig(0) << ',' << r.ginv_eig(1) << ','
        << r.pred_bias.dot(r.radial) << ',' << r.pred_bias.dot(r.transverse) << ','
        << r.radial.dot(r.delta * r.radial) << ',' << r.transverse.dot(r.delta * r.transverse) << ','
        << r.radial.dot(disc * r.radial) << ',' << r.transverse.dot(disc * r.transverse) << '\n';
  }
  out.precision(old);
}

}  // namespace tdoa
