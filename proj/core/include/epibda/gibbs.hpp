#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "epibda/likelihood.hpp"
#include "epibda/model.hpp"
#include "epibda/random.hpp"

namespace epibda {

/// Gamma(shape, rate): mean shape / rate.
struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;

  double logpdf(double x) const;
};

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;

  double logpdf(double x) const;
};

struct PriorSpec {
  GammaPrior beta;
  GammaPrior gamma;
  GammaPrior mu;
  BetaPrior rho;
  GammaPrior phi{1.0, 0.1};
  std::vector<double> p_init_alpha;

  /// Throws std::invalid_argument on nonpositive hyperparameters or a
  /// Dirichlet vector of the wrong length.
  void validate(const ModelSpec& model, EmissionKind emission) const;
  /// Joint log prior density of theta (parameters the model does not use are
  /// skipped).
  double logpdf(const Parameters& theta, const ModelSpec& model, EmissionKind emission) const;
  /// Draw theta from the prior.
  Parameters sample(const ModelSpec& model, EmissionKind emission, Rng& rng) const;
};

double log_dirichlet_pdf(std::span<const double> p, std::span<const double> alpha);

/// Conjugate Gamma draws for every rate the model uses, in transition order.
void update_rate_params(const SufficientStatistics& stats, const ModelSpec& model, const PriorSpec& priors,
                        Parameters& theta, Rng& rng);

/// Beta(a + sum Y, b + sum (I - Y)). Throws std::logic_error if some
/// I_l < Y_l.
double update_rho_binomial(std::span<const int> infected, std::span<const int> observed, const BetaPrior& prior,
                           Rng& rng);

/// Dirichlet(alpha + counts at t_1).
std::vector<double> update_p_t1(std::span<const int> initial_counts, std::span<const double> alpha, Rng& rng);

/// One joint random-walk step on (logit rho, log phi) under the
/// negative-binomial emission. `proposal_cov` is a 2x2 covariance; an all-zero
/// matrix leaves theta unchanged. Returns true on acceptance.
bool update_rho_phi_rwmh(std::span<const int> infected, std::span<const int> observed, Parameters& theta,
                         const Eigen::Matrix2d& proposal_cov, const PriorSpec& priors, Rng& rng);

/// Log target of (logit rho, log phi) up to a constant: emission
/// log-likelihood, log priors, and the log Jacobian of the transform.
double rho_phi_log_target(std::span<const int> infected, std::span<const int> observed, double rho, double phi,
                          const PriorSpec& priors);

/// Covariance adaptation for the (rho, phi) random walk during a pilot
/// phase. The empirical covariance of the pilot draws, scaled by 2.38^2/2,
/// is refreshed every `refresh` steps; a global scale factor is then
/// nudged toward the acceptance band [0.15, 0.5].
class RhoPhiAdapter {
 public:
  explicit RhoPhiAdapter(long pilot = 10'000, int refresh = 500);

  const Eigen::Matrix2d& covariance() const { return cov_; }
  bool adapting() const { return steps_ < pilot_; }
  void record(const Parameters& theta, bool accepted);
  double acceptance_rate() const;

 private:
  long pilot_;
  int refresh_;
  long steps_ = 0;
  long accepted_ = 0;
  long window_accepted_ = 0;
  int window_steps_ = 0;
  double scale_ = 1.0;
  Eigen::Vector2d sum_ = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sum_sq_ = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cov_;
};

}  // namespace epibda
