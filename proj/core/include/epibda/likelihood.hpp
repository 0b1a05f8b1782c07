#pragma once

#include <vector>

#include "epibda/history.hpp"
#include "epibda/model.hpp"

namespace epibda {

/// Event counts and integrated exposures per transition of the model. For an
/// infective-contact transition the exposure is the integral of S*I; for a
/// constant-rate transition it is the integral of the source compartment.
struct SufficientStatistics {
  std::vector<int> counts;
  std::vector<double> exposure;
};

SufficientStatistics sufficient_statistics(const PopulationHistory& history, const ModelSpec& model);

/// Population-level CTMC part of the complete-data likelihood: initial-state
/// terms, one log-rate per event at its left limit, minus the integrated total
/// rate over [t_1, t_L]. Emission terms excluded.
double ctmc_loglik(const PopulationHistory& history, const Parameters& theta, const ModelSpec& model);

/// Sum of emission log-probabilities over the observations.
double data_loglik(const PopulationHistory& history, const Dataset& data, const Parameters& theta,
                   const ModelSpec& model, EmissionKind emission);

/// Full complete-data log-likelihood (emission + initial + path terms).
double complete_data_loglik(const PopulationHistory& history, const Dataset& data,
                            const Parameters& theta, const ModelSpec& model, EmissionKind emission);

}  // namespace epibda
