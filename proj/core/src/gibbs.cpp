#include "epibda/gibbs.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace epibda {

double GammaPrior::logpdf(double x) const {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double BetaPrior::logpdf(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) return kNegInf;
  const double norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double out = norm;
  if (a != 1.0) out += (a - 1.0) * std::log(x);
  if (b != 1.0) out += (b - 1.0) * std::log1p(-x);
  return out;
}

double log_dirichlet_pdf(std::span<const double> p, std::span<const double> alpha) {
  if (p.size() != alpha.size()) throw std::invalid_argument("dirichlet: size mismatch");
  double out = 0.0;
  double alpha_total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    alpha_total += alpha[k];
    out -= std::lgamma(alpha[k]);
    if (alpha[k] != 1.0) {
      if (!(p[k] > 0.0)) return kNegInf;
      out += (alpha[k] - 1.0) * std::log(p[k]);
    }
  }
  return out + std::lgamma(alpha_total);
}

void PriorSpec::validate(const ModelSpec& model, EmissionKind emission) const {
  auto check_gamma = [](const GammaPrior& g, const char* name) {
    if (!(g.shape > 0.0 && g.rate > 0.0)) {
      throw std::invalid_argument(std::string("prior for ") + name + " needs positive shape and rate");
    }
  };
  check_gamma(beta, "beta");
  check_gamma(mu, "mu");
  if (model.uses(RateParam::Gamma)) check_gamma(gamma, "gamma");
  if (emission == EmissionKind::NegativeBinomial) check_gamma(phi, "phi");
  if (!(rho.a > 0.0 && rho.b > 0.0)) throw std::invalid_argument("prior for rho needs positive a and b");
  if (static_cast<int>(p_init_alpha.size()) != model.num_states()) {
    throw std::invalid_argument("prior.p0.alpha needs one entry per model state");
  }
  for (double a : p_init_alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("prior.p0.alpha entries must be positive");
  }
}

double PriorSpec::logpdf(const Parameters& theta, const ModelSpec& model, EmissionKind emission) const {
  double out = beta.logpdf(theta.beta) + mu.logpdf(theta.mu) + rho.logpdf(theta.rho) +
               log_dirichlet_pdf(theta.p_init, p_init_alpha);
  if (model.uses(RateParam::Gamma)) out += gamma.logpdf(theta.gamma);
  if (emission == EmissionKind::NegativeBinomial) out += phi.logpdf(theta.phi);
  return out;
}

Parameters PriorSpec::sample(const ModelSpec& model, EmissionKind emission, Rng& rng) const {
  Parameters theta;
  theta.beta = gamma_rate(rng, beta.shape, beta.rate);
  if (model.uses(RateParam::Gamma)) theta.gamma = gamma_rate(rng, gamma.shape, gamma.rate);
  theta.mu = gamma_rate(rng, mu.shape, mu.rate);
  theta.rho = beta_draw(rng, rho.a, rho.b);
  if (emission == EmissionKind::NegativeBinomial) theta.phi = gamma_rate(rng, phi.shape, phi.rate);
  theta.p_init = dirichlet(rng, p_init_alpha);
  return theta;
}

void update_rate_params(const SufficientStatistics& stats, const ModelSpec& model, const PriorSpec& priors,
                        Parameters& theta, Rng& rng) {
  const auto& transitions = model.transitions();
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const RateParam param = transitions[k].param;
    const GammaPrior& prior = param == RateParam::Beta ? priors.beta
                              : param == RateParam::Mu ? priors.mu
                                                       : priors.gamma;
    theta.rate(param) = gamma_rate(rng, prior.shape + stats.counts[k], prior.rate + stats.exposure[k]);
  }
}

double update_rho_binomial(std::span<const int> infected, std::span<const int> observed, const BetaPrior& prior,
                           Rng& rng) {
  if (infected.size() != observed.size()) throw std::invalid_argument("update_rho: size mismatch");
  double detected = 0.0;
  double missed = 0.0;
  for (std::size_t l = 0; l < observed.size(); ++l) {
    if (infected[l] < observed[l]) {
      throw std::logic_error("update_rho: latent prevalence below an observed count");
    }
    detected += observed[l];
    missed += infected[l] - observed[l];
  }
  return beta_draw(rng, prior.a + detected, prior.b + missed);
}

std::vector<double> update_p_t1(std::span<const int> initial_counts, std::span<const double> alpha, Rng& rng) {
  if (initial_counts.size() != alpha.size()) throw std::invalid_argument("update_p_t1: size mismatch");
  std::vector<double> posterior(alpha.begin(), alpha.end());
  for (std::size_t k = 0; k < posterior.size(); ++k) posterior[k] += initial_counts[k];
  return dirichlet(rng, posterior);
}

double rho_phi_log_target(std::span<const int> infected, std::span<const int> observed, double rho, double phi,
                          const PriorSpec& priors) {
  if (!(rho > 0.0 && rho < 1.0 && phi > 0.0 && std::isfinite(phi))) return kNegInf;
  Parameters theta;
  theta.rho = rho;
  theta.phi = phi;
  double out = priors.rho.logpdf(rho) + priors.phi.logpdf(phi) + std::log(rho) + std::log1p(-rho) + std::log(phi);
  for (std::size_t l = 0; l < observed.size(); ++l) {
    out += emission_loglik(observed[l], infected[l], theta, EmissionKind::NegativeBinomial);
    if (out == kNegInf) break;
  }
  return out;
}

bool update_rho_phi_rwmh(std::span<const int> infected, std::span<const int> observed, Parameters& theta,
                         const Eigen::Matrix2d& proposal_cov, const PriorSpec& priors, Rng& rng) {
  if (proposal_cov.isZero(0.0)) return true;
  Eigen::LLT<Eigen::Matrix2d> chol(proposal_cov);
  if (chol.info() != Eigen::Success) {
    throw std::invalid_argument("rho/phi proposal covariance is not positive definite");
  }
  const Eigen::Vector2d noise(standard_normal(rng), standard_normal(rng));
  const Eigen::Vector2d step = chol.matrixL() * noise;
  const double logit = std::log(theta.rho) - std::log1p(-theta.rho) + step(0);
  const double rho_new = 1.0 / (1.0 + std::exp(-logit));
  const double phi_new = theta.phi * std::exp(step(1));
  const double log_ratio = rho_phi_log_target(infected, observed, rho_new, phi_new, priors) -
                           rho_phi_log_target(infected, observed, theta.rho, theta.phi, priors);
  if (std::log(uniform_open(rng)) < log_ratio) {
    theta.rho = rho_new;
    theta.phi = phi_new;
    return true;
  }
  return false;
}

RhoPhiAdapter::RhoPhiAdapter(long pilot, int refresh) : pilot_(pilot), refresh_(refresh) {
  if (refresh_ <= 0) throw std::invalid_argument("adapter refresh interval must be positive");
  cov_ = Eigen::Matrix2d::Identity() * 0.01;
}

void RhoPhiAdapter::record(const Parameters& theta, bool accepted) {
  ++steps_;
  accepted_ += accepted;
  if (steps_ > pilot_) return;
  const Eigen::Vector2d z(std::log(theta.rho) - std::log1p(-theta.rho), std::log(theta.phi));
  sum_ += z;
  sum_sq_ += z * z.transpose();
  window_accepted_ += accepted;
  if (++window_steps_ < refresh_) return;

  const double rate = static_cast<double>(window_accepted_) / window_steps_;
  if (rate < 0.15) scale_ *= 0.6;
  if (rate > 0.5) scale_ *= 1.5;
  window_accepted_ = 0;
  window_steps_ = 0;

  Eigen::Matrix2d base = Eigen::Matrix2d::Identity() * 0.01;
  if (steps_ >= 2L * refresh_) {
    const double n = static_cast<double>(steps_);
    const Eigen::Vector2d mean = sum_ / n;
    const Eigen::Matrix2d empirical = (sum_sq_ - n * mean * mean.transpose()) / (n - 1.0);
    base = (2.38 * 2.38 / 2.0) * empirical + Eigen::Matrix2d::Identity() * 1e-8;
  }
  cov_ = scale_ * base;
}

double RhoPhiAdapter::acceptance_rate() const {
  return steps_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(steps_);
}

}  // namespace epibda
