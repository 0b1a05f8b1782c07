#pragma once

#include <cstdint>
#include <vector>

#include "epibda/config.hpp"
#include "epibda/history.hpp"
#include "epibda/model.hpp"
#include "epibda/random.hpp"

namespace epibda {

/// Post-burn-in output of one chain. Parameter rows are kept for every
/// iteration; latent histories every `thin` iterations.
struct ChainOutput {
  std::vector<long> iteration;
  std::vector<Parameters> draws;
  std::vector<double> logpost;
  std::vector<double> accept_rate;
  std::vector<long> snapshot_iteration;
  std::vector<PopulationHistory> snapshots;
  long proposals = 0;
  long accepted = 0;
  long rejected = 0;
  /// Proposals abandoned because no subject state sequence fits the data.
  long hmm_failures = 0;
  /// PMMH only: filter runs and how many returned -inf.
  long filter_runs = 0;
  long degenerate_runs = 0;
  double seconds = 0.0;
};

/// Simulate complete histories under theta until one has positive emission
/// probability for every observation. Each observation interval is
/// re-simulated from its starting counts (up to 1000 times) when its end
/// state cannot produce the next observation; an attempt that still fails
/// starts over from t_1. Throws std::runtime_error once `max_attempts`
/// attempts have failed.
PopulationHistory initialize_paths(const ModelSpec& model, const Parameters& theta, const Dataset& data,
                                   EmissionKind emission, Rng& rng, long max_attempts = 100'000);

/// One chain of the data-augmentation sampler (or PMMH when the config asks
/// for it). Each iteration draws the subjects to update uniformly without
/// replacement, updates their paths in that order, then updates the rates,
/// the emission parameters and p_t1. Deterministic given (config.seed, chain).
ChainOutput run_chain(const RunConfig& config, const Dataset& data, int chain);

/// Runs `config.chains` chains on separate threads; chain k uses stream k.
std::vector<ChainOutput> run_chains(const RunConfig& config, const Dataset& data);

}  // namespace epibda
