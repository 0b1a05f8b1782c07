#pragma once

// Reference computations used by the unit and acceptance tests. They share
// no numerical code with the library: matrix exponentials run in quad
// precision, and finite-state likelihoods are assembled by enumeration.

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "epibda/history.hpp"
#include "epibda/model.hpp"

namespace epibda::oracle {

/// exp(t * a) by scaling and squaring with a `terms`-term Taylor series,
/// evaluated in 113-bit floating point.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a, double t, int terms = 30);

/// Product of quad-precision exponentials exp(dt_0 a_0) exp(dt_1 a_1) ...
Eigen::MatrixXd expm_product(const std::vector<Eigen::MatrixXd>& rates, const std::vector<double>& durations);

/// Per-subject generator written out directly from the model's flow diagram.
Eigen::MatrixXd subject_generator(const ModelSpec& model, const Parameters& theta, int others_infectious);

/// Population count process on all configurations of N subjects over the
/// model's states.
struct CountChain {
  std::vector<std::vector<int>> configs;
  std::map<std::vector<int>, int> index;
  Eigen::MatrixXd generator;

  int find(const std::vector<int>& counts) const { return index.at(counts); }
};

CountChain count_chain(const ModelSpec& model, const Parameters& theta, int population);

/// Multinomial(N, p) law over the configurations of `chain`.
Eigen::VectorXd multinomial_law(const CountChain& chain, const std::vector<double>& p, int population);

/// Emission probability (not log) by direct pmf evaluation.
double emission_prob(int y, int infected, const Parameters& theta, EmissionKind emission);

/// Exact Pr(Y_1..Y_L | theta) for the count process: forward recursion over
/// all configurations, starting from Multinomial(N, p_t1) at t_1.
double exact_likelihood(const ModelSpec& model, const Parameters& theta, const Dataset& data,
                        EmissionKind emission);

/// Transition matrix of subject `subject` between two times, built from the
/// other subjects' events by direct recount.
Eigen::MatrixXd subject_transition(const PopulationHistory& history, int subject, const ModelSpec& model,
                                   const Parameters& theta, double from, double to);

/// Posterior law of subject `subject`'s states at the observation times given
/// everybody else, by enumeration of all K^L sequences. Entry `code` encodes
/// the sequence in base K with s_1 as the most significant digit.
std::vector<double> subject_sequence_law(const PopulationHistory& history, int subject, const Dataset& data,
                                         const Parameters& theta, const ModelSpec& model, EmissionKind emission);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

/// Normalized histogram of integer categories 0..size-1.
std::vector<double> frequencies(const std::vector<long>& counts);

}  // namespace epibda::oracle
