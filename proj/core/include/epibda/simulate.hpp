#pragma once

#include <span>
#include <vector>

#include "epibda/history.hpp"
#include "epibda/model.hpp"
#include "epibda/random.hpp"

namespace epibda {

/// One event of the count process: `transition` indexes ModelSpec::transitions().
struct LumpedEvent {
  double time;
  int transition;
};

/// Count-level trajectory on [start, end]; subject identities are absent.
struct LumpedPath {
  double start = 0.0;
  double end = 0.0;
  std::vector<int> initial_counts;
  std::vector<LumpedEvent> events;

  /// Counts after every event (the final configuration).
  std::vector<int> final_counts(const ModelSpec& model) const;
  /// Counts just before `t`.
  std::vector<int> counts_before(const ModelSpec& model, double t) const;
};

/// Piecewise-constant parameters: `parameters[k]` applies on
/// [boundaries[k], boundaries[k+1]).
struct EpochSchedule {
  std::vector<double> boundaries;
  std::vector<Parameters> parameters;

  static EpochSchedule constant(const Parameters& theta, double start, double end);
  void validate() const;
  double start() const { return boundaries.front(); }
  double end() const { return boundaries.back(); }
};

/// Per-capita hazard of each transition given the current counts: the
/// lumped rate of transition k is hazard[k] * counts[from_k].
void transition_hazards(const ModelSpec& model, const Parameters& theta, std::span<const int> counts,
                        std::span<double> hazard);

/// Exact direct-method simulation of the count process. The process is
/// restarted with the next epoch's rates (and unchanged counts) at every
/// epoch boundary.
LumpedPath gillespie_simulate(const ModelSpec& model, const EpochSchedule& schedule, std::vector<int> initial_counts,
                              Rng& rng);
LumpedPath gillespie_simulate(const ModelSpec& model, const Parameters& theta, std::vector<int> initial_counts,
                              double start, double end, Rng& rng);

/// Advance `counts` in place by `duration` with exact simulation.
void gillespie_advance(const ModelSpec& model, const Parameters& theta, std::span<int> counts, double duration,
                       Rng& rng);

/// Subjects 0..N-1 laid out in state order according to `counts`.
std::vector<int> initial_states_from_counts(std::span<const int> counts);

/// Assign every lumped event to a subject chosen uniformly among those in
/// the source state at the event's left limit.
PopulationHistory disaggregate(const ModelSpec& model, const LumpedPath& path, Rng& rng);

/// Drop subject identities.
LumpedPath lump(const PopulationHistory& history, const ModelSpec& model);

/// One emission draw given `infected` infectives.
int sample_emission(int infected, const Parameters& theta, EmissionKind emission, Rng& rng);

/// Independent emission draws at `times` given the prevalence of `history`.
Dataset sample_observations(const PopulationHistory& history, const ModelSpec& model, std::span<const double> times,
                            const Parameters& theta, EmissionKind emission, Rng& rng);

/// Multinomial tau-leaping: within each step every compartment's members
/// leave through each exit channel with competing-risks probability
/// (r_i / r) * (1 - exp(-r * h)). The final step is shortened to land
/// exactly on `duration`.
void tau_leap_advance(const ModelSpec& model, const Parameters& theta, std::span<int> counts, double duration,
                      double step, Rng& rng);

/// Counts at every time of `grid` (the first grid time carries `initial_counts`).
std::vector<std::vector<int>> tau_leap_simulate(const ModelSpec& model, const Parameters& theta,
                                                std::vector<int> initial_counts, std::span<const double> grid,
                                                double step, Rng& rng);

/// Simulation with one exponential clock per subject and exit channel,
/// redrawn after every event.
PopulationHistory simulate_subject_level(const ModelSpec& model, const Parameters& theta,
                                         std::vector<int> initial_states, double start, double end, Rng& rng);

}  // namespace epibda
