#include "epibda/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epibda/likelihood.hpp"

namespace epibda {

IntervalPartition build_partition(const PopulationHistory& history, int subject, const Dataset& data,
                                  const ModelSpec& model) {
  if (data.times.empty()) throw std::invalid_argument("build_partition: dataset has no observations");
  if (data.times.front() != history.start() || data.times.back() != history.end()) {
    throw std::invalid_argument("build_partition: observation window differs from the history window");
  }
  const PiecewiseConstant others = excluded_prevalence(history, subject, model.infectious_state());
  const auto& event_times = others.breakpoints;

  IntervalPartition out;
  out.breakpoints.reserve(event_times.size() + data.times.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < event_times.size() || j < data.times.size()) {
    double t;
    if (j >= data.times.size() || (i < event_times.size() && event_times[i] < data.times[j])) {
      t = event_times[i++];
    } else {
      t = data.times[j];
      if (i < event_times.size() && event_times[i] == t) ++i;
      out.observation_index.push_back(out.breakpoints.size());
      ++j;
    }
    if (out.breakpoints.empty() || t > out.breakpoints.back()) {
      out.breakpoints.push_back(t);
    } else if (!out.observation_index.empty() && out.observation_index.back() == out.breakpoints.size()) {
      out.observation_index.back() = out.breakpoints.size() - 1;
    }
  }

  const std::size_t intervals = out.breakpoints.size() - 1;
  out.excluded_infected.resize(intervals);
  std::size_t k = 0;
  for (std::size_t m = 0; m < intervals; ++m) {
    const double t = out.breakpoints[m];
    while (k + 1 < others.values.size() && event_times[k + 1] <= t) ++k;
    out.excluded_infected[m] = others.values[k];
  }

  out.excluded_at_observation.resize(data.times.size());
  for (std::size_t l = 0; l < data.times.size(); ++l) {
    const std::size_t idx = out.observation_index[l];
    out.excluded_at_observation[l] = idx == 0 ? others.values.front() : out.excluded_infected[idx - 1];
  }
  return out;
}

PartitionTransitions partition_transitions(const IntervalPartition& partition, DecompositionCache& cache) {
  const std::size_t n = partition.num_intervals();
  PartitionTransitions out;
  out.step.resize(n);
  out.to_observation.resize(n);
  std::vector<bool> is_observation(partition.breakpoints.size(), false);
  for (std::size_t idx : partition.observation_index) is_observation[idx] = true;
  for (std::size_t m = 0; m < n; ++m) {
    out.step[m] = cache.transition(partition.excluded_infected[m],
                                   partition.breakpoints[m + 1] - partition.breakpoints[m]);
  }
  for (std::size_t m = n; m-- > 0;) {
    if (is_observation[m + 1]) {
      out.to_observation[m] = out.step[m];
    } else {
      out.to_observation[m].noalias() = out.step[m] * out.to_observation[m + 1];
    }
  }
  return out;
}

std::optional<HmmDraw> hmm_sample_observation_states(const IntervalPartition& partition,
                                                     const PartitionTransitions& transitions,
                                                     const Dataset& data, const Parameters& theta,
                                                     const ModelSpec& model, EmissionKind emission, Rng& rng) {
  const int n = model.num_states();
  const std::size_t num_obs = data.times.size();
  const int infectious = model.infectious_state();
  std::vector<StateVector> filtered(num_obs, StateVector::Zero(n));
  HmmDraw out;

  for (std::size_t l = 0; l < num_obs; ++l) {
    double log_emission[kMaxStates];
    double peak = kNegInf;
    for (int s = 0; s < n; ++s) {
      const int infected = partition.excluded_at_observation[l] + (s == infectious ? 1 : 0);
      log_emission[s] = emission_loglik(data.counts[l], infected, theta, emission);
      peak = std::max(peak, log_emission[s]);
    }
    if (peak == kNegInf) return std::nullopt;

    StateVector predicted(n);
    if (l == 0) {
      for (int s = 0; s < n; ++s) predicted(s) = theta.p_init[s];
    } else {
      predicted = transitions.between_observations(partition, l).transpose() * filtered[l - 1];
    }
    double total = 0.0;
    for (int s = 0; s < n; ++s) {
      filtered[l](s) = predicted(s) * std::exp(log_emission[s] - peak);
      total += filtered[l](s);
    }
    if (!(total > 0.0)) return std::nullopt;
    filtered[l] /= total;
    out.log_marginal += std::log(total) + peak;
  }

  out.states.assign(num_obs, 0);
  out.states[num_obs - 1] = categorical(rng, std::span<const double>(filtered[num_obs - 1].data(), n));
  for (std::size_t l = num_obs - 1; l > 0; --l) {
    const TransitionMatrix& p = transitions.between_observations(partition, l);
    double weights[kMaxStates];
    for (int r = 0; r < n; ++r) weights[r] = filtered[l - 1](r) * p(r, out.states[l]);
    const int prev = categorical(rng, std::span<const double>(weights, n));
    if (prev < 0) throw std::logic_error("forward-backward: sampled successor has no predecessor mass");
    out.states[l - 1] = prev;
  }
  return out;
}

std::vector<int> skeleton_sample(const IntervalPartition& partition, const PartitionTransitions& transitions,
                                 std::span<const int> observation_states, const ModelSpec& model, Rng& rng) {
  const int n = model.num_states();
  std::vector<int> states(partition.breakpoints.size(), -1);
  for (std::size_t l = 0; l < observation_states.size(); ++l) {
    states[partition.observation_index[l]] = observation_states[l];
  }
  for (std::size_t l = 1; l < observation_states.size(); ++l) {
    const std::size_t first = partition.observation_index[l - 1];
    const std::size_t last = partition.observation_index[l];
    const int target = states[last];
    if (model.monotone() && states[first] == target) {
      std::fill(states.begin() + static_cast<std::ptrdiff_t>(first), states.begin() + static_cast<std::ptrdiff_t>(last),
                target);
      continue;
    }
    for (std::size_t i = first; i + 1 < last; ++i) {
      const int cur = states[i];
      double weights[kMaxStates];
      for (int x = 0; x < n; ++x) weights[x] = transitions.step[i](cur, x) * transitions.to_observation[i + 1](x, target);
      const int next = categorical(rng, std::span<const double>(weights, n));
      if (next < 0) throw std::logic_error("skeleton: endpoint states are unreachable from the current state");
      states[i + 1] = next;
    }
  }
  return states;
}

SubjectPath bridge_fill(const IntervalPartition& partition, const PartitionTransitions& transitions,
                        std::span<const int> skeleton, const ModelSpec& model, DecompositionCache& cache,
                        BridgeSampler sampler, Rng& rng, long rejection_budget) {
  SubjectPath path{skeleton[0], {}};
  for (std::size_t m = 0; m < partition.num_intervals(); ++m) {
    const int a = skeleton[m];
    const int b = skeleton[m + 1];
    const auto& rates = cache.get(partition.excluded_infected[m]).rates;
    if (a == b && (model.monotone() || !(rates(a, a) < 0.0))) continue;

    const double left = partition.breakpoints[m];
    const double right = partition.breakpoints[m + 1];
    BridgeProblem problem{rates, right - left, a, b, transitions.step[m]};
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw std::runtime_error("bridge_fill: could not place jumps strictly inside an interval");
      std::optional<SubjectPath> piece;
      if (sampler == BridgeSampler::ModifiedRejection) piece = modified_rejection_bridge(problem, rng, rejection_budget);
      if (!piece) piece = uniformization_bridge(problem, rng);
      // Shifted times can round onto a breakpoint; such draws are redrawn.
      bool inside = true;
      double prev = left;
      for (const auto& j : piece->jumps) {
        const double t = left + j.time;
        if (!(t > prev && t < right)) {
          inside = false;
          break;
        }
        prev = t;
      }
      if (!inside) continue;
      for (const auto& j : piece->jumps) path.jumps.push_back({left + j.time, j.to});
      break;
    }
  }
  return path;
}

double proposal_logdensity(const SubjectPath& path, const IntervalPartition& partition, const Parameters& theta,
                           DecompositionCache& cache) {
  const double p0 = theta.p_init.at(static_cast<std::size_t>(path.start));
  if (!(p0 > 0.0)) return kNegInf;
  double out = std::log(p0);
  int state = path.start;
  std::size_t k = 0;
  for (std::size_t m = 0; m < partition.num_intervals(); ++m) {
    const double left = partition.breakpoints[m];
    const double right = partition.breakpoints[m + 1];
    const std::size_t begin = k;
    while (k < path.jumps.size() && path.jumps[k].time < right) ++k;
    const std::span<const Jump> jumps(path.jumps.data() + begin, k - begin);
    out += homogeneous_path_loglik(state, jumps, left, right, cache.get(partition.excluded_infected[m]).rates);
    if (out == kNegInf) return out;
    if (!jumps.empty()) state = jumps.back().to;
  }
  if (k != path.jumps.size()) throw std::invalid_argument("proposal_logdensity: jumps beyond the window");
  return out;
}

double mh_log_ratio(const PopulationHistory& current, const PopulationHistory& proposed, double log_q_current,
                    double log_q_proposed, const Parameters& theta, const ModelSpec& model) {
  const double target_new = ctmc_loglik(proposed, theta, model);
  if (target_new == kNegInf || log_q_current == kNegInf) return kNegInf;
  return (target_new - ctmc_loglik(current, theta, model)) - (log_q_proposed - log_q_current);
}

SubjectUpdate update_subject(PopulationHistory& history, int subject, const Dataset& data, const Parameters& theta,
                             const ModelSpec& model, EmissionKind emission, BridgeSampler sampler,
                             DecompositionCache& cache, Rng& rng) {
  SubjectUpdate result;
  const IntervalPartition partition = build_partition(history, subject, data, model);
  const PartitionTransitions transitions = partition_transitions(partition, cache);
  const auto hmm = hmm_sample_observation_states(partition, transitions, data, theta, model, emission, rng);
  if (!hmm) {
    result.hmm_failed = true;
    return result;
  }
  const auto skeleton = skeleton_sample(partition, transitions, hmm->states, model, rng);
  const SubjectPath proposed_path = bridge_fill(partition, transitions, skeleton, model, cache, sampler, rng);

  const double log_q_new = proposal_logdensity(proposed_path, partition, theta, cache);
  const double log_q_cur = proposal_logdensity(history.subject_path(subject), partition, theta, cache);
  PopulationHistory proposed = history;
  proposed.set_subject_path(subject, proposed_path);
  result.log_ratio = mh_log_ratio(history, proposed, log_q_cur, log_q_new, theta, model);
  const double u = uniform_open(rng);
  if (result.log_ratio >= 0.0 || std::log(u) < result.log_ratio) {
    result.accepted = true;
    history = std::move(proposed);
  }
  return result;
}

}  // namespace epibda
