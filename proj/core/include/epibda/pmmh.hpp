#pragma once

#include <array>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "epibda/gibbs.hpp"
#include "epibda/model.hpp"
#include "epibda/random.hpp"

namespace epibda {

enum class PathSimulator { Exact, TauLeap };

PathSimulator path_simulator_from_name(std::string_view name);
std::string_view path_simulator_name(PathSimulator sim);

struct FilterConfig {
  int particles = 500;
  PathSimulator simulator = PathSimulator::Exact;
  /// tau-leap step; ignored for exact paths.
  double step = 1.0;
};

/// Particle cloud at the current observation time.
struct ParticleEnsemble {
  std::vector<std::array<int, kMaxStates>> counts;
  std::vector<double> log_weights;
  double loglik = 0.0;
  bool degenerate = false;
};

/// Bootstrap particle filter estimate of log Pr(Y_1..Y_L | theta) for the
/// count process. Particles start from Multinomial(N, p_t1) at t_1 and are
/// resampled multinomially after every observation. Returns -inf when every
/// particle has zero weight at some observation.
double bootstrap_loglik(const ModelSpec& model, const Dataset& data, const Parameters& theta,
                        EmissionKind emission, const FilterConfig& config, Rng& rng);

/// Unconstrained coordinates: log rates, logit rho, log phi, and log(p_k / p_K)
/// for k < K.
std::vector<double> to_unconstrained(const Parameters& theta, const ModelSpec& model, EmissionKind emission);
Parameters from_unconstrained(std::span<const double> z, const ModelSpec& model, EmissionKind emission);
/// log |d theta / d z| at theta.
double log_jacobian(const Parameters& theta, const ModelSpec& model, EmissionKind emission);

struct PmmhConfig {
  long iterations = 10'000;
  /// Iterations during which the proposal covariance adapts; frozen afterwards.
  long pilot = 2'000;
  /// Standard deviation of the initial isotropic proposal on the
  /// unconstrained scale.
  double initial_scale = 0.05;
  double target_acceptance = 0.234;
  int max_init_attempts = 100;
  FilterConfig filter;
};

struct PmmhOutput {
  std::vector<Parameters> draws;
  std::vector<double> loglik;
  std::vector<double> logpost;
  std::vector<double> accept_rate;
  long accepted = 0;
  long proposed = 0;
  long filter_runs = 0;
  long degenerate_runs = 0;
  Eigen::MatrixXd proposal_cov;
};

/// Returns a (possibly noisy) log-likelihood for theta.
using LoglikFunction = std::function<double(const Parameters&, Rng&)>;

/// Adaptive random-walk MH on the unconstrained scale with a pluggable
/// log-likelihood. During the pilot phase the covariance follows the running
/// empirical covariance (scaled by 2.38^2/d) and a global scale is tuned by
/// Robbins-Monro toward `target_acceptance`.
PmmhOutput adaptive_rwmh_chain(const ModelSpec& model, EmissionKind emission, const PriorSpec& priors,
                               const Parameters& initial, const PmmhConfig& config, const LoglikFunction& loglik,
                               Rng& rng);

/// PMMH: adaptive_rwmh_chain driven by bootstrap_loglik.
PmmhOutput pmmh_chain(const ModelSpec& model, EmissionKind emission, const Dataset& data, const PriorSpec& priors,
                      const Parameters& initial, const PmmhConfig& config, Rng& rng);

}  // namespace epibda
