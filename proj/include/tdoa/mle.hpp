#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdoa/geometry.hpp"
#include "tdoa/projection.hpp"

namespace tdoa {

/// M: sources with a unique preimage (parameter set U).
/// Mi: sources on the second sheet near sensor i (parameter set Ui).
enum class ModelId { M, M0, M1, M2 };

const char* to_string(ModelId m);
std::optional<ModelId> parse_model(const std::string& s);

/// Restricted model whose parameter set is the image of the region.
/// Throws std::invalid_argument for DegeneracyLocus.
ModelId model_for(Region r);

enum class CandidateKind { Interior, Facet, Ellipse, Vertex };

const char* to_string(CandidateKind k);

struct Estimate {
  ModelId model = ModelId::M;
  Tdoa2 tau_bar;
  Location location;
  double lrt_stat = 0.0;
  bool accepted = false;
  CandidateKind kind = CandidateKind::Interior;
  std::string candidate;  // "interior", "P0+", "E1", "R2", ...
};

/// Log density of N(tau, Sigma2) at t_hat.
double log_likelihood(const Metric2& metric, const Tdoa2& t_hat, const Tdoa2& tau);

/// Closest point (Mahalanobis) of the closure of the model's parameter set,
/// mapped back to the x-plane. `accepted` is left false.
Estimate mle_restricted(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t_hat, ModelId model);

/// Upper alpha quantile of the chi-square law with df degrees of freedom.
double chi2_threshold(double alpha_level, int df = 1);

/// All four restricted estimates; accepted = lrt_stat < threshold.
std::vector<Estimate> mle_blind(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t_hat,
                                double alpha_level = 0.05, int df = 1);

/// Same, with an explicit cutoff.
std::vector<Estimate> mle_blind_threshold(const SensorConfig& cfg, const Metric2& metric, const Tdoa2& t_hat,
                                          double threshold);

}  // namespace tdoa
