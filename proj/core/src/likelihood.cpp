#include "epibda/likelihood.hpp"

#include <cmath>

namespace epibda {

namespace {

double exposure_multiplier(const Transition& t, const std::vector<int>& counts, int infectious) {
  const double source = counts[t.from];
  return t.form == RateForm::InfectiveContact ? source * counts[infectious] : source;
}

}  // namespace

SufficientStatistics sufficient_statistics(const PopulationHistory& history, const ModelSpec& model) {
  const auto& transitions = model.transitions();
  const int infectious = model.infectious_state();
  SufficientStatistics stats{std::vector<int>(transitions.size(), 0),
                             std::vector<double>(transitions.size(), 0.0)};
  std::vector<int> counts = history.initial_counts();
  double prev = history.start();
  auto accumulate = [&](double until) {
    const double dt = until - prev;
    for (std::size_t k = 0; k < transitions.size(); ++k) {
      stats.exposure[k] += dt * exposure_multiplier(transitions[k], counts, infectious);
    }
    prev = until;
  };
  for (const auto& e : history.events()) {
    accumulate(e.time);
    ++stats.counts[model.transition_index(e.from, e.to)];
    --counts[e.from];
    ++counts[e.to];
  }
  accumulate(history.end());
  return stats;
}

double ctmc_loglik(const PopulationHistory& history, const Parameters& theta, const ModelSpec& model) {
  double out = 0.0;
  const auto initial = history.initial_counts();
  for (int s = 0; s < model.num_states(); ++s) {
    if (initial[s] == 0) continue;
    if (!(theta.p_init[s] > 0.0)) return kNegInf;
    out += initial[s] * std::log(theta.p_init[s]);
  }

  const auto& transitions = model.transitions();
  const int infectious = model.infectious_state();
  std::vector<int> counts = initial;
  double prev = history.start();
  double total_rate = 0.0;
  auto refresh_total = [&] {
    total_rate = 0.0;
    for (const auto& t : transitions) total_rate += theta.rate(t.param) * exposure_multiplier(t, counts, infectious);
  };
  refresh_total();
  for (const auto& e : history.events()) {
    out -= (e.time - prev) * total_rate;
    const auto& t = transitions[model.transition_index(e.from, e.to)];
    const double rate = t.form == RateForm::InfectiveContact ? theta.rate(t.param) * counts[infectious]
                                                             : theta.rate(t.param);
    if (!(rate > 0.0)) return kNegInf;
    out += std::log(rate);
    --counts[e.from];
    ++counts[e.to];
    prev = e.time;
    refresh_total();
  }
  out -= (history.end() - prev) * total_rate;
  return out;
}

double data_loglik(const PopulationHistory& history, const Dataset& data, const Parameters& theta,
                   const ModelSpec& model, EmissionKind emission) {
  const auto prevalence = prevalence_at(history, model, data.times);
  double out = 0.0;
  for (std::size_t l = 0; l < prevalence.size(); ++l) {
    out += emission_loglik(data.counts[l], prevalence[l], theta, emission);
    if (out == kNegInf) return out;
  }
  return out;
}

double complete_data_loglik(const PopulationHistory& history, const Dataset& data,
                            const Parameters& theta, const ModelSpec& model, EmissionKind emission) {
  const double emission_part = data_loglik(history, data, theta, model, emission);
  if (emission_part == kNegInf) return kNegInf;
  return emission_part + ctmc_loglik(history, theta, model);
}

}  // namespace epibda
