#include "epibda/pmmh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "epibda/simulate.hpp"

namespace epibda {

PathSimulator path_simulator_from_name(std::string_view name) {
  if (name == "exact" || name == "gillespie") return PathSimulator::Exact;
  if (name == "tauleap" || name == "tau-leap" || name == "tau_leap") return PathSimulator::TauLeap;
  throw std::invalid_argument("unknown path simulator '" + std::string(name) + "'");
}

std::string_view path_simulator_name(PathSimulator sim) {
  return sim == PathSimulator::Exact ? "exact" : "tauleap";
}

double bootstrap_loglik(const ModelSpec& model, const Dataset& data, const Parameters& theta,
                        EmissionKind emission, const FilterConfig& config, Rng& rng) {
  if (config.particles < 1) throw std::invalid_argument("bootstrap filter needs at least one particle");
  if (data.times.empty()) return 0.0;
  const int n_states = model.num_states();
  const int infectious = model.infectious_state();
  const auto particles = static_cast<std::size_t>(config.particles);

  ParticleEnsemble ens;
  ens.counts.resize(particles);
  ens.log_weights.resize(particles);
  for (auto& c : ens.counts) {
    c.fill(0);
    const auto drawn = multinomial(rng, data.population, theta.p_init);
    std::copy(drawn.begin(), drawn.end(), c.begin());
  }

  std::vector<double> cumulative(particles);
  std::vector<double> uniforms(particles);
  std::vector<std::array<int, kMaxStates>> resampled(particles);
  for (std::size_t l = 0; l < data.times.size(); ++l) {
    if (l > 0) {
      const double dt = data.times[l] - data.times[l - 1];
      for (auto& c : ens.counts) {
        const std::span<int> counts(c.data(), static_cast<std::size_t>(n_states));
        if (config.simulator == PathSimulator::Exact) {
          gillespie_advance(model, theta, counts, dt, rng);
        } else {
          tau_leap_advance(model, theta, counts, dt, config.step, rng);
        }
      }
    }
    double peak = kNegInf;
    for (std::size_t i = 0; i < particles; ++i) {
      ens.log_weights[i] = emission_loglik(data.counts[l], ens.counts[i][infectious], theta, emission);
      peak = std::max(peak, ens.log_weights[i]);
    }
    if (peak == kNegInf) {
      ens.degenerate = true;
      return kNegInf;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < particles; ++i) {
      total += std::exp(ens.log_weights[i] - peak);
      cumulative[i] = total;
    }
    ens.loglik += peak + std::log(total / static_cast<double>(particles));
    if (l + 1 == data.times.size()) break;

    for (auto& u : uniforms) u = uniform_open(rng) * total;
    std::sort(uniforms.begin(), uniforms.end());
    std::size_t k = 0;
    for (std::size_t i = 0; i < particles; ++i) {
      while (k + 1 < particles && cumulative[k] <= uniforms[i]) ++k;
      resampled[i] = ens.counts[k];
    }
    std::swap(ens.counts, resampled);
  }
  return ens.loglik;
}

std::vector<double> to_unconstrained(const Parameters& theta, const ModelSpec& model, EmissionKind emission) {
  std::vector<double> z;
  z.push_back(std::log(theta.beta));
  if (model.uses(RateParam::Gamma)) z.push_back(std::log(theta.gamma));
  z.push_back(std::log(theta.mu));
  z.push_back(std::log(theta.rho) - std::log1p(-theta.rho));
  if (emission == EmissionKind::NegativeBinomial) z.push_back(std::log(theta.phi));
  const double reference = theta.p_init.back();
  for (std::size_t k = 0; k + 1 < theta.p_init.size(); ++k) z.push_back(std::log(theta.p_init[k] / reference));
  return z;
}

Parameters from_unconstrained(std::span<const double> z, const ModelSpec& model, EmissionKind emission) {
  Parameters theta;
  std::size_t i = 0;
  theta.beta = std::exp(z[i++]);
  if (model.uses(RateParam::Gamma)) theta.gamma = std::exp(z[i++]);
  theta.mu = std::exp(z[i++]);
  theta.rho = 1.0 / (1.0 + std::exp(-z[i++]));
  if (emission == EmissionKind::NegativeBinomial) theta.phi = std::exp(z[i++]);
  const auto n = static_cast<std::size_t>(model.num_states());
  theta.p_init.assign(n, 0.0);
  double peak = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) peak = std::max(peak, z[i + k]);
  double total = std::exp(-peak);
  theta.p_init[n - 1] = total;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    theta.p_init[k] = std::exp(z[i + k] - peak);
    total += theta.p_init[k];
  }
  for (auto& p : theta.p_init) p /= total;
  return theta;
}

double log_jacobian(const Parameters& theta, const ModelSpec& model, EmissionKind emission) {
  double out = std::log(theta.beta) + std::log(theta.mu) + std::log(theta.rho) + std::log1p(-theta.rho);
  if (model.uses(RateParam::Gamma)) out += std::log(theta.gamma);
  if (emission == EmissionKind::NegativeBinomial) out += std::log(theta.phi);
  for (double p : theta.p_init) out += std::log(p);
  return out;
}

PmmhOutput adaptive_rwmh_chain(const ModelSpec& model, EmissionKind emission, const PriorSpec& priors,
                               const Parameters& initial, const PmmhConfig& config, const LoglikFunction& loglik,
                               Rng& rng) {
  PmmhOutput out;
  auto evaluate = [&](const Parameters& theta) {
    const double value = loglik(theta, rng);
    ++out.filter_runs;
    if (value == kNegInf) ++out.degenerate_runs;
    return value;
  };

  std::vector<double> z = to_unconstrained(initial, model, emission);
  const auto d = static_cast<Eigen::Index>(z.size());
  Parameters theta = from_unconstrained(z, model, emission);
  double ll = kNegInf;
  for (int attempt = 0; attempt < std::max(1, config.max_init_attempts) && !std::isfinite(ll); ++attempt) {
    ll = evaluate(theta);
  }
  if (!std::isfinite(ll)) {
    throw std::runtime_error("PMMH: log-likelihood at the initial parameters is not finite");
  }
  double prior = priors.logpdf(theta, model, emission);
  double target = ll + prior + log_jacobian(theta, model, emission);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd cov = identity * config.initial_scale * config.initial_scale;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  double log_scale = 0.0;
  const long warmup = std::max<long>(100, 10 * d);

  std::vector<double> proposal(z.size());
  for (long it = 0; it < config.iterations; ++it) {
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(d, d);
    if (!cov.isZero(0.0)) {
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success) throw std::runtime_error("PMMH: proposal covariance lost definiteness");
      chol = llt.matrixL();
    }
    Eigen::VectorXd noise(d);
    for (Eigen::Index k = 0; k < d; ++k) noise(k) = standard_normal(rng);
    const Eigen::VectorXd step = chol * noise;
    for (Eigen::Index k = 0; k < d; ++k) proposal[k] = z[k] + step(k);

    const Parameters candidate = from_unconstrained(proposal, model, emission);
    const double candidate_prior = priors.logpdf(candidate, model, emission);
    bool accepted = false;
    ++out.proposed;
    if (std::isfinite(candidate_prior)) {
      const double candidate_ll = evaluate(candidate);
      const double candidate_target = candidate_ll + candidate_prior + log_jacobian(candidate, model, emission);
      if (std::log(uniform_open(rng)) < candidate_target - target) {
        accepted = true;
        z = proposal;
        theta = candidate;
        ll = candidate_ll;
        prior = candidate_prior;
        target = candidate_target;
        ++out.accepted;
      }
    }

    if (it < config.pilot) {
      const Eigen::Map<const Eigen::VectorXd> current(z.data(), d);
      const double n = static_cast<double>(it + 1);
      const Eigen::VectorXd delta = current - mean;
      mean += delta / n;
      scatter += delta * (current - mean).transpose();
      log_scale += std::pow(n, -0.6) * ((accepted ? 1.0 : 0.0) - config.target_acceptance);
      if (it + 1 >= warmup) {
        const Eigen::MatrixXd empirical = scatter / (n - 1.0);
        cov = std::exp(2.0 * log_scale) * (2.38 * 2.38 / static_cast<double>(d)) * (empirical + 1e-8 * identity);
      } else {
        cov = std::exp(2.0 * log_scale) * config.initial_scale * config.initial_scale * identity;
      }
    }

    out.draws.push_back(theta);
    out.loglik.push_back(ll);
    out.logpost.push_back(ll + prior);
    out.accept_rate.push_back(static_cast<double>(out.accepted) / static_cast<double>(out.proposed));
  }
  out.proposal_cov = cov;
  return out;
}

PmmhOutput pmmh_chain(const ModelSpec& model, EmissionKind emission, const Dataset& data, const PriorSpec& priors,
                      const Parameters& initial, const PmmhConfig& config, Rng& rng) {
  const LoglikFunction filter = [&](const Parameters& theta, Rng& stream) {
    return bootstrap_loglik(model, data, theta, emission, config.filter, stream);
  };
  return adaptive_rwmh_chain(model, emission, priors, initial, config, filter, rng);
}

}  // namespace epibda
