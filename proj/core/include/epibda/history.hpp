#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epibda/model.hpp"

namespace epibda {

struct Jump {
  double time;
  int to;
};

/// A single subject's trajectory: starting state plus strictly increasing
/// jump times. Times are absolute or interval-relative depending on context.
struct SubjectPath {
  int start = 0;
  std::vector<Jump> jumps;

  int end_state() const { return jumps.empty() ? start : jumps.back().to; }
  /// State occupied just before `t` (left limit).
  int state_before(double t) const;
};

struct Event {
  double time;
  int subject;
  std::uint8_t from;
  std::uint8_t to;
};

/// Piecewise-constant function on [breakpoints.front(), breakpoints.back()]:
/// `values[k]` holds on [breakpoints[k], breakpoints[k+1]).
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<int> values;

  int at(double t) const;
};

/// Augmented data: initial state of every subject at t_1 plus the time-ordered
/// event list on (t_1, t_L). Compartment counts are derived on demand from the
/// event list and follow the left-limit convention: the count "at" t excludes
/// any event occurring exactly at t.
class PopulationHistory {
 public:
  PopulationHistory() = default;
  PopulationHistory(int num_states, double start, double end, std::vector<int> initial_states,
                    std::vector<Event> events);

  int num_states() const { return num_states_; }
  int size() const { return static_cast<int>(initial_.size()); }
  double start() const { return start_; }
  double end() const { return end_; }
  const std::vector<int>& initial_states() const { return initial_; }
  const std::vector<Event>& events() const { return events_; }

  std::vector<int> initial_counts() const;
  SubjectPath subject_path(int subject) const;

  /// Replace subject `j`'s trajectory. The new jump times must not collide
  /// with any other event time.
  void set_subject_path(int subject, const SubjectPath& path);

  /// Throws std::logic_error describing the first broken invariant.
  void check(const ModelSpec& model) const;

 private:
  int num_states_ = 0;
  double start_ = 0.0;
  double end_ = 0.0;
  std::vector<int> initial_;
  std::vector<Event> events_;
};

/// Counts per state just before `t` (t in [start, end]).
std::vector<int> compartment_counts(const PopulationHistory& history, double t);

/// Counts just before each of the sorted `times`, one row per time.
std::vector<std::vector<int>> compartment_counts_at(const PopulationHistory& history,
                                                    std::span<const double> times);

/// Number of subjects other than `subject` in `state` as a piecewise-constant
/// function. Breakpoints are t_1, every event time of the other subjects, and
/// t_L, so the rates seen by `subject` are constant between breakpoints.
PiecewiseConstant excluded_prevalence(const PopulationHistory& history, int subject, int state);

/// Infective counts at the observation times (left limits).
std::vector<int> prevalence_at(const PopulationHistory& history, const ModelSpec& model,
                               std::span<const double> times);

}  // namespace epibda
