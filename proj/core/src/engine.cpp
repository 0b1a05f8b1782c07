#include "epibda/engine.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include "epibda/ctmc.hpp"
#include "epibda/gibbs.hpp"
#include "epibda/likelihood.hpp"
#include "epibda/pmmh.hpp"
#include "epibda/proposal.hpp"
#include "epibda/simulate.hpp"

namespace epibda {

namespace {

constexpr int kSegmentRetries = 1000;

bool emits(const Dataset& data, std::size_t l, std::span<const int> counts, const Parameters& theta,
           const ModelSpec& model, EmissionKind emission) {
  const int infected = counts[static_cast<std::size_t>(model.infectious_state())];
  return emission_loglik(data.counts[l], infected, theta, emission) > kNegInf;
}

// Builds the count path one observation interval at a time. An interval whose
// end state cannot produce the next observation is re-simulated from its
// start state; after kSegmentRetries failures the attempt is abandoned.
// Hopeless attempts therefore stop early and are never expanded to subject
// level.
std::optional<LumpedPath> simulate_compatible(const ModelSpec& model, const Parameters& theta, const Dataset& data,
                                              EmissionKind emission, Rng& rng) {
  LumpedPath path;
  path.start = data.start();
  path.end = data.end();
  path.initial_counts = multinomial(rng, data.population, theta.p_init);
  if (!emits(data, 0, path.initial_counts, theta, model, emission)) return std::nullopt;
  std::vector<int> counts = path.initial_counts;
  for (std::size_t l = 1; l < data.size(); ++l) {
    bool found = false;
    for (int retry = 0; retry < kSegmentRetries && !found; ++retry) {
      LumpedPath piece = gillespie_simulate(model, theta, counts, data.times[l - 1], data.times[l], rng);
      std::vector<int> next = piece.final_counts(model);
      if (!emits(data, l, next, theta, model, emission)) continue;
      counts = std::move(next);
      path.events.insert(path.events.end(), piece.events.begin(), piece.events.end());
      found = true;
    }
    if (!found) return std::nullopt;
  }
  return path;
}

}  // namespace

PopulationHistory initialize_paths(const ModelSpec& model, const Parameters& theta, const Dataset& data,
                                   EmissionKind emission, Rng& rng, long max_attempts) {
  for (long attempt = 0; attempt < max_attempts; ++attempt) {
    const auto path = simulate_compatible(model, theta, data, emission, rng);
    if (!path) continue;
    PopulationHistory history = disaggregate(model, *path, rng);
    if (data_loglik(history, data, theta, model, emission) > kNegInf) return history;
  }
  throw std::runtime_error("could not simulate a latent history compatible with the data after " +
                           std::to_string(max_attempts) +
                           " attempts; check the initial parameters, the priors and the population size");
}

namespace {

ChainOutput run_pmmh(const RunConfig& config, const ModelSpec& model, const Dataset& data, const Parameters& init,
                     Rng& rng) {
  ChainOutput out;
  const PmmhOutput chain = pmmh_chain(model, config.emission, data, config.priors, init, config.pmmh, rng);
  for (std::size_t it = static_cast<std::size_t>(config.burn_in); it < chain.draws.size(); ++it) {
    out.iteration.push_back(static_cast<long>(it));
    out.draws.push_back(chain.draws[it]);
    out.logpost.push_back(chain.logpost[it]);
    out.accept_rate.push_back(chain.accept_rate[it]);
  }
  out.proposals = chain.proposed;
  out.accepted = chain.accepted;
  out.rejected = chain.proposed - chain.accepted;
  out.filter_runs = chain.filter_runs;
  out.degenerate_runs = chain.degenerate_runs;
  return out;
}

}  // namespace

ChainOutput run_chain(const RunConfig& config, const Dataset& data, int chain) {
  const auto started = std::chrono::steady_clock::now();
  const ModelSpec model = config.model_spec();
  validate(data);
  Rng rng = make_rng(config.seed, static_cast<std::uint64_t>(chain));

  Parameters theta = config.initial ? *config.initial : config.priors.sample(model, config.emission, rng);
  validate(theta, model, config.emission);

  ChainOutput out;
  if (config.method == Method::Pmmh) {
    out = run_pmmh(config, model, data, theta, rng);
  } else {
    PopulationHistory history = initialize_paths(model, theta, data, config.emission, rng, config.init_attempts);
    const int n = history.size();
    const int per_iter = config.resolved_subjects_per_iter(n);
    const BridgeSampler sampler = config.bridge_sampler.value_or(default_bridge_sampler(model));
    DecompositionCache cache(model, theta);
    RhoPhiAdapter adapter(config.rho_phi_pilot);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (long it = 0; it < config.iterations; ++it) {
      for (int i = 0; i < per_iter; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
        const SubjectUpdate update = update_subject(history, order[static_cast<std::size_t>(i)], data, theta, model,
                                                    config.emission, sampler, cache, rng);
        ++out.proposals;
        if (update.accepted) {
          ++out.accepted;
        } else {
          ++out.rejected;
        }
        if (update.hmm_failed) ++out.hmm_failures;
      }

      update_rate_params(sufficient_statistics(history, model), model, config.priors, theta, rng);
      const auto infected = prevalence_at(history, model, data.times);
      if (config.emission == EmissionKind::Binomial) {
        theta.rho = update_rho_binomial(infected, data.counts, config.priors.rho, rng);
      } else {
        const bool moved = update_rho_phi_rwmh(infected, data.counts, theta, adapter.covariance(), config.priors, rng);
        adapter.record(theta, moved);
      }
      theta.p_init = update_p_t1(history.initial_counts(), config.priors.p_init_alpha, rng);
      cache.reset(theta);

      if (it < config.burn_in) continue;
      out.iteration.push_back(it);
      out.draws.push_back(theta);
      out.logpost.push_back(complete_data_loglik(history, data, theta, model, config.emission) +
                            config.priors.logpdf(theta, model, config.emission));
      out.accept_rate.push_back(static_cast<double>(out.accepted) / static_cast<double>(out.proposals));
      if ((it - config.burn_in) % config.thin == 0) {
        out.snapshot_iteration.push_back(it);
        out.snapshots.push_back(history);
      }
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::vector<ChainOutput> run_chains(const RunConfig& config, const Dataset& data) {
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(config.chains));
  std::vector<std::exception_ptr> errors(outputs.size());
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    workers.emplace_back([&, k] {
      try {
        outputs[k] = run_chain(config, data, static_cast<int>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

}  // namespace epibda
