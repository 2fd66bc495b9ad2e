// tdoaloc: command-line front end for the TDOA localization library.
//
// Exit status: 0 success, 1 usage / input error, 2 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdoa/campaign.hpp"
#include "tdoa/error.hpp"
#include "tdoa/geometry.hpp"
#include "tdoa/inference.hpp"
#include "tdoa/kv_file.hpp"
#include "tdoa/mle.hpp"
#include "tdoa/projection.hpp"

namespace {

using namespace tdoa;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Metric2 metric_from(const std::vector<double>& v) {
  if (v.size() == 1) return Metric2(v[0] * Mat2::Identity());
  if (v.size() == 3) {
    Mat2 m;
    m << v[0], v[1], v[1], v[2];
    return Metric2(m);
  }
  throw UsageError("--sigma2 takes 1 value (variance) or 3 values (s11 s12 s22)");
}

// The library works in the stored (counterclockwise) labeling; these helpers
// translate model names and sensor indices to the caller's labeling.
ModelId model_to_internal(const SensorConfig& cfg, ModelId m) {
  if (!cfg.relabeled() || m == ModelId::M || m == ModelId::M0) return m;
  return m == ModelId::M1 ? ModelId::M2 : ModelId::M1;
}

void print_location(std::ostream& out, const SensorConfig& cfg, const Location& loc) {
  if (const auto* p = std::get_if<Vec2>(&loc)) {
    out << "point," << p->x() << ',' << p->y();
  } else if (const auto* d = std::get_if<IdealDirection>(&loc)) {
    out << "direction," << d->unit.x() << ',' << d->unit.y();
  } else {
    const int s = cfg.user_sensor(std::get<SensorVertex>(loc).index);
    out << "sensor" << s << ',' << cfg.sensor(std::get<SensorVertex>(loc).index).x() << ','
        << cfg.sensor(std::get<SensorVertex>(loc).index).y();
  }
}

void print_estimate(std::ostream& out, const SensorConfig& cfg, const Estimate& e) {
  const Tdoa2 t = cfg.to_user(e.tau_bar);
  out << to_string(model_to_internal(cfg, e.model)) << ',' << t.tau10 << ',' << t.tau20 << ',' << to_string(e.kind)
      << ',';
  print_location(out, cfg, e.location);
  out << ',' << e.lrt_stat << ',' << (e.accepted ? 1 : 0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TDOA source localization with three receivers"};
  app.require_subcommand(1);

  std::string config;
  std::vector<double> sigma2;
  std::vector<double> tau;
  std::vector<double> xy;
  std::string model = "blind";
  double alpha = 0.05;
  int df = 1;
  std::string spec_path;
  std::string out_path;

  auto add_config = [&](CLI::App* c) { c->add_option("--config", config, "sensor file (m0x ... m2y)")->required(); };
  auto add_sigma = [&](CLI::App* c) {
    c->add_option("--sigma2", sigma2, "reduced covariance: variance, or s11 s12 s22")->required()->expected(1, 3);
  };

  auto* localize = app.add_subcommand("localize", "maximum likelihood estimate(s) for a measurement");
  add_config(localize);
  add_sigma(localize);
  localize->add_option("--tau", tau, "tau10 tau20")->required()->expected(2);
  localize->add_option("--model", model, "M, M0, M1, M2 or blind");
  localize->add_option("--alpha", alpha, "test level for blind acceptance");
  localize->add_option("--df", df, "chi-square degrees of freedom for blind acceptance");

  auto* classify = app.add_subcommand("classify", "region label of a source position");
  add_config(classify);
  classify->add_option("--x", xy, "x y")->required()->expected(2);

  auto* project = app.add_subcommand("project", "facet and ellipse projections of a measurement");
  add_config(project);
  add_sigma(project);
  project->add_option("--tau", tau, "tau10 tau20")->required()->expected(2);

  auto* discriminant = app.add_subcommand("discriminant", "sextic coefficients of the projection discriminant");
  add_config(discriminant);
  add_sigma(discriminant);

  auto* report = app.add_subcommand("report", "asymptotic error report at a source position");
  add_config(report);
  add_sigma(report);
  report->add_option("--x", xy, "x y")->required()->expected(2);

  auto* campaign = app.add_subcommand("campaign", "Monte Carlo grid campaign");
  campaign->add_option("--spec", spec_path, "campaign spec file")->required();
  campaign->add_option("--out", out_path, "override the spec's output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::cout.precision(17);
  try {
    if (*campaign) {
      CampaignSpec spec = read_campaign_spec_file(spec_path);
      if (!out_path.empty()) spec.out = out_path;
      const auto rows = run_campaign(spec);
      if (spec.out == "-") {
        write_campaign_csv(std::cout, rows);
      } else {
        std::ofstream f(spec.out);
        if (!f) throw UsageError("cannot write '" + spec.out + "'");
        write_campaign_csv(f, rows);
      }
      return 0;
    }

    const SensorConfig cfg = read_sensor_config_file(config);

    if (*classify) {
      std::cout << to_string(region_classify(cfg, {xy[0], xy[1]})) << '\n';
      return 0;
    }

    const Metric2 metric = metric_from(sigma2);

    if (*localize) {
      const Tdoa2 t = cfg.to_internal({tau[0], tau[1]});
      std::cout << "model,tau10,tau20,kind,location,lx,ly,lrt_stat,accepted\n";
      if (model == "blind") {
        for (const auto& e : mle_blind(cfg, metric, t, alpha, df)) print_estimate(std::cout, cfg, e);
      } else {
        const auto m = parse_model(model);
        if (!m) throw UsageError("unknown model '" + model + "'");
        auto e = mle_restricted(cfg, metric, t, model_to_internal(cfg, *m));
        e.accepted = e.lrt_stat < chi2_threshold(alpha, df);
        print_estimate(std::cout, cfg, e);
      }
    } else if (*project) {
      if (cfg.relabeled()) throw UsageError("project expects counterclockwise sensors m0, m1, m2");
      const Tdoa2 t{tau[0], tau[1]};
      std::cout << "name,tau10,tau20,distance2,on_boundary\n";
      for (const auto& f : project_facets(cfg, metric, t)) {
        std::cout << f.name() << ',' << f.point.tau10 << ',' << f.point.tau20 << ',' << f.distance2 << ','
                  << (f.on_boundary_of_model ? 1 : 0) << '\n';
      }
      const auto ell = project_ellipse(cfg, metric, t);
      for (std::size_t k = 0; k < ell.size(); ++k) {
        std::cout << 'E' << k << ',' << ell[k].point.tau10 << ',' << ell[k].point.tau20 << ',' << ell[k].distance2
                  << ",\n";
      }
    } else if (*discriminant) {
      if (cfg.relabeled()) throw UsageError("discriminant expects counterclockwise sensors m0, m1, m2");
      write_sextic_csv(std::cout, discriminant_sextic(cfg, metric));
    } else if (*report) {
      write_report_header(std::cout);
      write_report_row(std::cout, asymptotic_report(cfg, metric, {xy[0], xy[1]}));
    }
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "tdoaloc: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "tdoaloc: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "tdoaloc: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tdoaloc: " << e.what() << '\n';
    return 2;
  }
}
