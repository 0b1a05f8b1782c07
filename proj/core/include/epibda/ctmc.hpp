#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "epibda/history.hpp"
#include "epibda/model.hpp"

namespace epibda {

/// Small dense matrix over model states (at most 4x4, stored inline).
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxStates, kMaxStates>;
using StateVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxStates, 1>;
using RateMatrix = StateMatrix;
using TransitionMatrix = StateMatrix;

/// Generator seen by one subject when `excluded_infected` other subjects are
/// infectious and parameters are `theta`.
RateMatrix build_subject_rate_matrix(const ModelSpec& model, const Parameters& theta, int excluded_infected);

/// Spectral decomposition Lambda = basis * V * basis_inv. V is diagonal for
/// real eigenvalues; a conjugate pair alpha +/- i*beta occupies a 2x2 block
/// [[alpha, beta], [-beta, alpha]] whose first index holds +beta in `imag`.
struct EigenSystem {
  StateVector real;
  StateVector imag;
  StateMatrix basis;
  StateMatrix basis_inv;
  bool complex_pair = false;

  /// basis * V * basis_inv, for checking reconstructions.
  StateMatrix reconstruct() const;
};

/// Returns std::nullopt when the matrix is defective or so close to it that
/// the eigenbasis is ill-conditioned; callers then use series_expm.
std::optional<EigenSystem> eigen_decompose(const RateMatrix& rates);

/// exp(dt * Lambda) via the eigensystem, with tiny negative entries clamped
/// and rows renormalized.
TransitionMatrix transition_matrix(const EigenSystem& eig, double dt);

/// exp(dt * Lambda), falling back to series_expm when no usable
/// decomposition exists.
TransitionMatrix transition_matrix(const RateMatrix& rates, double dt);

/// Scaling-and-squaring with a truncated Taylor series of `terms` terms.
StateMatrix series_expm(const RateMatrix& rates, double dt, int terms = 30);

struct TimeInterval {
  double start;
  double end;
};

/// Ordered product P(tau_0, tau_1) ... P(tau_{S-1}, tau_S). Throws
/// std::invalid_argument if consecutive intervals leave a gap or overlap.
TransitionMatrix tpm_product(std::span<const TimeInterval> intervals, std::span<const RateMatrix> rates);

/// Log density of a subject path segment on [start, end] under a
/// time-homogeneous generator. Jump times must lie in (start, end).
double homogeneous_path_loglik(int start_state, std::span<const Jump> jumps, double start, double end,
                               const RateMatrix& rates);

/// Memoized per-subject generators and eigensystems keyed by the integer
/// number of other infectives. Entries are only valid for the parameter
/// value passed to the last reset().
class DecompositionCache {
 public:
  struct Entry {
    RateMatrix rates;
    std::optional<EigenSystem> eigen;
  };

  DecompositionCache(const ModelSpec& model, const Parameters& theta);

  void reset(const Parameters& theta);
  const Entry& get(int excluded_infected);
  TransitionMatrix transition(int excluded_infected, double dt);

  const Parameters& parameters() const { return theta_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t size() const { return size_; }

 private:
  const ModelSpec* model_;
  Parameters theta_;
  std::vector<std::optional<Entry>> entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::size_t size_ = 0;
};

}  // namespace epibda
