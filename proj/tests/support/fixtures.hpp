#pragma once

#include <vector>

#include "epibda/history.hpp"
#include "epibda/model.hpp"
#include "epibda/random.hpp"

namespace epibda::fixture {

/// History assembled from explicit per-subject paths (absolute times).
PopulationHistory history_from_paths(int num_states, double start, double end,
                                     const std::vector<SubjectPath>& paths);

/// Subject-level SIR/SEIR/SIRS history simulated under theta from random
/// initial states drawn from theta.p_init.
PopulationHistory random_history(const ModelSpec& model, const Parameters& theta, int population, double start,
                                 double end, Rng& rng);

Parameters sir_parameters(double beta, double mu, double rho, std::vector<double> p_init);

/// Observation times start, start + step, ..., end.
std::vector<double> grid(double start, double end, double step);

}  // namespace epibda::fixture
