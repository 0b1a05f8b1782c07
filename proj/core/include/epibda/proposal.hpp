#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "epibda/bridge.hpp"
#include "epibda/ctmc.hpp"
#include "epibda/history.hpp"
#include "epibda/model.hpp"
#include "epibda/random.hpp"

namespace epibda {

/// Partition of [t_1, t_L] on which subject j's generator is constant: the
/// window endpoints, every event time of the other subjects, and every
/// observation time.
struct IntervalPartition {
  std::vector<double> breakpoints;
  /// Other subjects' infective count on [breakpoints[m], breakpoints[m+1]).
  std::vector<int> excluded_infected;
  /// Breakpoint index of each observation time.
  std::vector<std::size_t> observation_index;
  /// Other subjects' infective count just before each observation time.
  std::vector<int> excluded_at_observation;

  std::size_t num_intervals() const { return excluded_infected.size(); }
};

/// The dataset's first and last times must coincide with the history window.
IntervalPartition build_partition(const PopulationHistory& history, int subject, const Dataset& data,
                                  const ModelSpec& model);

/// Per-interval transition matrices plus, for each interval m, the product
/// of the matrices from m up to the next observation time.
struct PartitionTransitions {
  std::vector<TransitionMatrix> step;
  std::vector<TransitionMatrix> to_observation;

  /// Transition matrix between observations l-1 and l (l >= 1).
  const TransitionMatrix& between_observations(const IntervalPartition& partition, std::size_t l) const {
    return to_observation[partition.observation_index[l - 1]];
  }
};

PartitionTransitions partition_transitions(const IntervalPartition& partition, DecompositionCache& cache);

struct HmmDraw {
  std::vector<int> states;
  /// log Pr(Y_1..Y_L | other subjects, theta) with subject j marginalized.
  double log_marginal = 0.0;
};

/// Stochastic forward-backward draw of subject j's states at the
/// observation times. std::nullopt when no state sequence is compatible with
/// the data.
std::optional<HmmDraw> hmm_sample_observation_states(const IntervalPartition& partition,
                                                     const PartitionTransitions& transitions,
                                                     const Dataset& data, const Parameters& theta,
                                                     const ModelSpec& model, EmissionKind emission, Rng& rng);

/// State at every breakpoint, given the states at observation times.
std::vector<int> skeleton_sample(const IntervalPartition& partition, const PartitionTransitions& transitions,
                                 std::span<const int> observation_states, const ModelSpec& model, Rng& rng);

/// Concatenates endpoint-conditioned bridges between consecutive breakpoints.
/// Modified rejection falls back to uniformization when its retry budget
/// runs out.
SubjectPath bridge_fill(const IntervalPartition& partition, const PartitionTransitions& transitions,
                        std::span<const int> skeleton, const ModelSpec& model, DecompositionCache& cache,
                        BridgeSampler sampler, Rng& rng, long rejection_budget = 1'000'000);

/// Log density of `path` under the time-inhomogeneous proposal CTMC.
double proposal_logdensity(const SubjectPath& path, const IntervalPartition& partition, const Parameters& theta,
                           DecompositionCache& cache);

/// Log MH ratio for replacing subject j's path: CTMC terms of the population
/// likelihood (emissions excluded) minus the proposal log densities.
double mh_log_ratio(const PopulationHistory& current, const PopulationHistory& proposed, double log_q_current,
                    double log_q_proposed, const Parameters& theta, const ModelSpec& model);

struct SubjectUpdate {
  bool accepted = false;
  /// The HMM step found no compatible state sequence; counted as a rejection.
  bool hmm_failed = false;
  double log_ratio = kNegInf;
};

/// One complete subject-path update (HMM, skeleton, bridges, MH). Random
/// numbers are consumed in that order, followed by one uniform for the MH
/// decision. `cache` must have been reset with `theta`.
SubjectUpdate update_subject(PopulationHistory& history, int subject, const Dataset& data, const Parameters& theta,
                             const ModelSpec& model, EmissionKind emission, BridgeSampler sampler,
                             DecompositionCache& cache, Rng& rng);

}  // namespace epibda
