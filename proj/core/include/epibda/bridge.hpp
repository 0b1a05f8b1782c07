#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "epibda/ctmc.hpp"
#include "epibda/history.hpp"
#include "epibda/random.hpp"

namespace epibda {

enum class BridgeSampler { ModifiedRejection, Uniformization };

BridgeSampler bridge_sampler_from_name(std::string_view name);
std::string_view bridge_sampler_name(BridgeSampler sampler);
/// Modified rejection for SIR and SIRS, uniformization for SEIR.
BridgeSampler default_bridge_sampler(const ModelSpec& model);

/// A homogeneous CTMC on [0, length] conditioned on X(0) = start and
/// X(length) = end. `tpm`, if given, must equal exp(length * rates).
struct BridgeProblem {
  RateMatrix rates;
  double length = 0.0;
  int start = 0;
  int end = 0;
  std::optional<TransitionMatrix> tpm;
};

/// Unconditioned Gillespie path on [0, length]; jump times in (0, length).
SubjectPath forward_simulate_subject(const RateMatrix& rates, int start, double length, Rng& rng);

/// Inverse CDF of the first jump time given that a jump occurs before T.
double sample_first_jump_conditional(double exit_rate, double length, double u);

/// Forward simulation with the first jump forced into [0, T) when the
/// endpoints differ; retried until the endpoint matches. Returns
/// std::nullopt after `max_attempts` failures. Throws std::invalid_argument if
/// the conditioning event has probability zero.
std::optional<SubjectPath> modified_rejection_bridge(const BridgeProblem& problem, Rng& rng,
                                                     long max_attempts = 1'000'000);

/// Normalized law of the number of uniformized (real plus virtual) jumps,
/// truncated once the cumulative mass reaches 1 - 1e-10.
std::vector<double> uniformization_jump_pmf(const BridgeProblem& problem);

/// Exact bridge by uniformization; virtual self-jumps are dropped.
SubjectPath uniformization_bridge(const BridgeProblem& problem, Rng& rng);

}  // namespace epibda
