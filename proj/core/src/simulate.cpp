#include "epibda/simulate.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace epibda {

namespace {

void apply_transition(const Transition& t, std::span<int> counts) {
  --counts[t.from];
  ++counts[t.to];
}

// Simulates on [start, end), appending events to `out` when non-null.
void direct_method(const ModelSpec& model, const Parameters& theta, std::span<int> counts, double start, double end,
                   Rng& rng, std::vector<LumpedEvent>* out) {
  const auto& transitions = model.transitions();
  std::array<double, kMaxStates> hazard{};
  std::array<double, kMaxStates> lumped{};
  double t = start;
  while (true) {
    transition_hazards(model, theta, counts, hazard);
    double total = 0.0;
    for (std::size_t k = 0; k < transitions.size(); ++k) {
      lumped[k] = hazard[k] * counts[transitions[k].from];
      total += lumped[k];
    }
    if (!(total > 0.0)) return;
    const double next = t + exponential(rng, total);
    if (!(next < end)) return;
    if (!(next > t)) continue;
    t = next;
    const int k = categorical(rng, std::span<const double>(lumped.data(), transitions.size()));
    apply_transition(transitions[k], counts);
    if (out) out->push_back({t, k});
  }
}

}  // namespace

std::vector<int> LumpedPath::final_counts(const ModelSpec& model) const {
  std::vector<int> counts = initial_counts;
  for (const auto& e : events) apply_transition(model.transitions()[e.transition], counts);
  return counts;
}

std::vector<int> LumpedPath::counts_before(const ModelSpec& model, double t) const {
  std::vector<int> counts = initial_counts;
  for (const auto& e : events) {
    if (!(e.time < t)) break;
    apply_transition(model.transitions()[e.transition], counts);
  }
  return counts;
}

EpochSchedule EpochSchedule::constant(const Parameters& theta, double start, double end) {
  return EpochSchedule{{start, end}, {theta}};
}

void EpochSchedule::validate() const {
  if (boundaries.size() < 2 || boundaries.size() != parameters.size() + 1) {
    throw std::invalid_argument("epoch schedule needs one parameter set per epoch");
  }
  for (std::size_t k = 1; k < boundaries.size(); ++k) {
    if (!(boundaries[k] > boundaries[k - 1])) throw std::invalid_argument("epoch boundaries must increase");
  }
}

void transition_hazards(const ModelSpec& model, const Parameters& theta, std::span<const int> counts,
                        std::span<double> hazard) {
  const auto& transitions = model.transitions();
  const int infectious = model.infectious_state();
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const auto& t = transitions[k];
    const double rate = theta.rate(t.param);
    hazard[k] = t.form == RateForm::InfectiveContact ? rate * counts[infectious] : rate;
  }
}

LumpedPath gillespie_simulate(const ModelSpec& model, const EpochSchedule& schedule, std::vector<int> initial_counts,
                              Rng& rng) {
  schedule.validate();
  if (static_cast<int>(initial_counts.size()) != model.num_states()) {
    throw std::invalid_argument("initial counts need one entry per model state");
  }
  LumpedPath path;
  path.start = schedule.start();
  path.end = schedule.end();
  path.initial_counts = initial_counts;
  std::vector<int> counts = std::move(initial_counts);
  for (std::size_t k = 0; k < schedule.parameters.size(); ++k) {
    direct_method(model, schedule.parameters[k], counts, schedule.boundaries[k], schedule.boundaries[k + 1], rng,
                  &path.events);
  }
  return path;
}

LumpedPath gillespie_simulate(const ModelSpec& model, const Parameters& theta, std::vector<int> initial_counts,
                              double start, double end, Rng& rng) {
  return gillespie_simulate(model, EpochSchedule::constant(theta, start, end), std::move(initial_counts), rng);
}

void gillespie_advance(const ModelSpec& model, const Parameters& theta, std::span<int> counts, double duration,
                       Rng& rng) {
  direct_method(model, theta, counts, 0.0, duration, rng, nullptr);
}

std::vector<int> initial_states_from_counts(std::span<const int> counts) {
  std::vector<int> states;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] < 0) throw std::invalid_argument("negative initial count");
    states.insert(states.end(), static_cast<std::size_t>(counts[s]), static_cast<int>(s));
  }
  return states;
}

PopulationHistory disaggregate(const ModelSpec& model, const LumpedPath& path, Rng& rng) {
  std::vector<int> initial = initial_states_from_counts(path.initial_counts);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(model.num_states()));
  for (std::size_t j = 0; j < initial.size(); ++j) members[initial[j]].push_back(static_cast<int>(j));

  std::vector<Event> events;
  events.reserve(path.events.size());
  for (const auto& e : path.events) {
    const auto& t = model.transitions().at(e.transition);
    auto& pool = members[t.from];
    if (pool.empty()) throw std::invalid_argument("disaggregate: no subject eligible for an event");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t slot = pick(rng);
    const int subject = pool[slot];
    pool[slot] = pool.back();
    pool.pop_back();
    members[t.to].push_back(subject);
    events.push_back({e.time, subject, static_cast<std::uint8_t>(t.from), static_cast<std::uint8_t>(t.to)});
  }
  return PopulationHistory(model.num_states(), path.start, path.end, std::move(initial), std::move(events));
}

LumpedPath lump(const PopulationHistory& history, const ModelSpec& model) {
  LumpedPath path;
  path.start = history.start();
  path.end = history.end();
  path.initial_counts = history.initial_counts();
  path.events.reserve(history.events().size());
  for (const auto& e : history.events()) path.events.push_back({e.time, model.transition_index(e.from, e.to)});
  return path;
}

int sample_emission(int infected, const Parameters& theta, EmissionKind emission, Rng& rng) {
  if (emission == EmissionKind::Binomial) return binomial(rng, infected, theta.rho);
  const double mean = theta.rho * infected;
  if (!(mean > 0.0)) return 0;
  const double lambda = gamma_rate(rng, theta.phi, theta.phi / mean);
  std::poisson_distribution<int> poisson(lambda);
  return poisson(rng);
}

Dataset sample_observations(const PopulationHistory& history, const ModelSpec& model, std::span<const double> times,
                            const Parameters& theta, EmissionKind emission, Rng& rng) {
  Dataset data;
  data.times.assign(times.begin(), times.end());
  data.population = history.size();
  for (int infected : prevalence_at(history, model, times)) {
    data.counts.push_back(sample_emission(infected, theta, emission, rng));
  }
  return data;
}

void tau_leap_advance(const ModelSpec& model, const Parameters& theta, std::span<int> counts, double duration,
                      double step, Rng& rng) {
  if (!(step > 0.0)) throw std::invalid_argument("tau-leap step must be positive");
  const auto& transitions = model.transitions();
  const int n = model.num_states();
  std::array<double, kMaxStates> hazard{};
  std::array<int, kMaxStates> moves{};
  double elapsed = 0.0;
  while (elapsed < duration) {
    const double h = std::min(step, duration - elapsed);
    elapsed = (duration - elapsed <= step) ? duration : elapsed + h;
    transition_hazards(model, theta, counts, hazard);
    moves.fill(0);
    for (int s = 0; s < n; ++s) {
      if (counts[s] == 0) continue;
      std::array<double, kMaxStates + 1> probs{};
      std::array<int, kMaxStates> channel{};
      std::size_t used = 0;
      double total = 0.0;
      for (std::size_t k = 0; k < transitions.size(); ++k) {
        if (transitions[k].from != s || !(hazard[k] > 0.0)) continue;
        channel[used] = static_cast<int>(k);
        probs[used] = hazard[k];
        total += hazard[k];
        ++used;
      }
      if (used == 0) continue;
      const double leave = -std::expm1(-total * h);
      for (std::size_t c = 0; c < used; ++c) probs[c] = probs[c] / total * leave;
      probs[used] = 1.0 - leave;
      const auto drawn = multinomial(rng, counts[s], std::span<const double>(probs.data(), used + 1));
      for (std::size_t c = 0; c < used; ++c) moves[channel[c]] = drawn[c];
    }
    for (std::size_t k = 0; k < transitions.size(); ++k) {
      counts[transitions[k].from] -= moves[k];
      counts[transitions[k].to] += moves[k];
    }
  }
}

std::vector<std::vector<int>> tau_leap_simulate(const ModelSpec& model, const Parameters& theta,
                                                std::vector<int> initial_counts, std::span<const double> grid,
                                                double step, Rng& rng) {
  std::vector<std::vector<int>> out;
  if (grid.empty()) return out;
  out.reserve(grid.size());
  out.push_back(initial_counts);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (!(grid[g] > grid[g - 1])) throw std::invalid_argument("tau-leap grid must increase");
    tau_leap_advance(model, theta, initial_counts, grid[g] - grid[g - 1], step, rng);
    out.push_back(initial_counts);
  }
  return out;
}

PopulationHistory simulate_subject_level(const ModelSpec& model, const Parameters& theta,
                                         std::vector<int> initial_states, double start, double end, Rng& rng) {
  const auto& transitions = model.transitions();
  std::vector<int> state = initial_states;
  std::vector<int> counts(static_cast<std::size_t>(model.num_states()), 0);
  for (int s : state) ++counts.at(static_cast<std::size_t>(s));
  std::array<double, kMaxStates> hazard{};
  std::vector<Event> events;
  double t = start;
  while (true) {
    transition_hazards(model, theta, counts, hazard);
    double first = std::numeric_limits<double>::infinity();
    int who = -1;
    int which = -1;
    for (std::size_t j = 0; j < state.size(); ++j) {
      for (std::size_t k = 0; k < transitions.size(); ++k) {
        if (transitions[k].from != state[j] || !(hazard[k] > 0.0)) continue;
        const double clock = exponential(rng, hazard[k]);
        if (clock < first) {
          first = clock;
          who = static_cast<int>(j);
          which = static_cast<int>(k);
        }
      }
    }
    if (who < 0 || !(t + first < end)) break;
    if (!(t + first > t)) continue;
    t += first;
    const auto& tr = transitions[static_cast<std::size_t>(which)];
    events.push_back({t, who, static_cast<std::uint8_t>(tr.from), static_cast<std::uint8_t>(tr.to)});
    state[static_cast<std::size_t>(who)] = tr.to;
    --counts[tr.from];
    ++counts[tr.to];
  }
  return PopulationHistory(model.num_states(), start, end, std::move(initial_states), std::move(events));
}

}  // namespace epibda
