#include "epibda/history.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace epibda {

int SubjectPath::state_before(double t) const {
  int state = start;
  for (const auto& j : jumps) {
    if (!(j.time < t)) break;
    state = j.to;
  }
  return state;
}

int PiecewiseConstant::at(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  std::size_t k = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  if (k >= values.size()) k = values.size() - 1;
  return values[k];
}

PopulationHistory::PopulationHistory(int num_states, double start, double end,
                                     std::vector<int> initial_states, std::vector<Event> events)
    : num_states_(num_states),
      start_(start),
      end_(end),
      initial_(std::move(initial_states)),
      events_(std::move(events)) {
  if (num_states_ <= 0 || num_states_ > kMaxStates) throw std::invalid_argument("bad state count");
  if (!(end_ >= start_)) throw std::invalid_argument("history window must satisfy start <= end");
  for (int s : initial_) {
    if (s < 0 || s >= num_states_) throw std::invalid_argument("initial state out of range");
  }
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& e = events_[k];
    if (e.subject < 0 || e.subject >= size()) throw std::invalid_argument("event subject out of range");
    if (!(e.time > start_ && e.time < end_)) throw std::invalid_argument("event time outside (start, end)");
    if (k > 0 && !(e.time > events_[k - 1].time)) {
      throw std::invalid_argument("event times must be strictly increasing");
    }
  }
}

std::vector<int> PopulationHistory::initial_counts() const {
  std::vector<int> counts(num_states_, 0);
  for (int s : initial_) ++counts[s];
  return counts;
}

SubjectPath PopulationHistory::subject_path(int subject) const {
  SubjectPath path{initial_.at(subject), {}};
  for (const auto& e : events_) {
    if (e.subject == subject) path.jumps.push_back({e.time, e.to});
  }
  return path;
}

void PopulationHistory::set_subject_path(int subject, const SubjectPath& path) {
  if (subject < 0 || subject >= size()) throw std::out_of_range("subject index out of range");
  if (path.start < 0 || path.start >= num_states_) throw std::invalid_argument("bad start state");
  std::vector<Event> merged;
  merged.reserve(events_.size() + path.jumps.size());
  std::size_t k = 0;
  int state = path.start;
  for (const auto& e : events_) {
    if (e.subject == subject) continue;
    while (k < path.jumps.size() && path.jumps[k].time < e.time) {
      merged.push_back({path.jumps[k].time, subject, static_cast<std::uint8_t>(state),
                        static_cast<std::uint8_t>(path.jumps[k].to)});
      state = path.jumps[k].to;
      ++k;
    }
    if (k < path.jumps.size() && path.jumps[k].time == e.time) {
      throw std::invalid_argument("subject jump collides with an existing event time");
    }
    merged.push_back(e);
  }
  for (; k < path.jumps.size(); ++k) {
    merged.push_back({path.jumps[k].time, subject, static_cast<std::uint8_t>(state),
                      static_cast<std::uint8_t>(path.jumps[k].to)});
    state = path.jumps[k].to;
  }
  for (std::size_t i = 0; i < path.jumps.size(); ++i) {
    const double t = path.jumps[i].time;
    if (!(t > start_ && t < end_)) throw std::invalid_argument("subject jump outside (start, end)");
    if (i > 0 && !(t > path.jumps[i - 1].time)) throw std::invalid_argument("subject jumps not increasing");
  }
  initial_[subject] = path.start;
  events_ = std::move(merged);
}

void PopulationHistory::check(const ModelSpec& model) const {
  if (model.num_states() != num_states_) throw std::logic_error("history/model state count mismatch");
  std::vector<int> state = initial_;
  std::vector<int> counts = initial_counts();
  double prev = start_;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& e = events_[k];
    if (!(e.time > prev) && k > 0) throw std::logic_error("event times not strictly increasing");
    if (!(e.time > start_ && e.time < end_)) throw std::logic_error("event outside observation window");
    prev = e.time;
    if (state[e.subject] != e.from) {
      throw std::logic_error("event " + std::to_string(k) + " does not start from the subject's state");
    }
    if (model.transition_index(e.from, e.to) < 0) {
      throw std::logic_error("event " + std::to_string(k) + " is not an allowed transition");
    }
    state[e.subject] = e.to;
    --counts[e.from];
    ++counts[e.to];
    if (counts[e.from] < 0) throw std::logic_error("negative compartment count");
  }
}

std::vector<int> compartment_counts(const PopulationHistory& history, double t) {
  if (!(t >= history.start() && t <= history.end())) {
    throw std::out_of_range("compartment_counts: time outside the observation window");
  }
  std::vector<int> counts = history.initial_counts();
  for (const auto& e : history.events()) {
    if (!(e.time < t)) break;
    --counts[e.from];
    ++counts[e.to];
  }
  return counts;
}

std::vector<std::vector<int>> compartment_counts_at(const PopulationHistory& history,
                                                    std::span<const double> times) {
  std::vector<std::vector<int>> out;
  out.reserve(times.size());
  std::vector<int> counts = history.initial_counts();
  const auto& events = history.events();
  std::size_t k = 0;
  for (double t : times) {
    if (!(t >= history.start() && t <= history.end())) {
      throw std::out_of_range("compartment_counts_at: time outside the observation window");
    }
    while (k < events.size() && events[k].time < t) {
      --counts[events[k].from];
      ++counts[events[k].to];
      ++k;
    }
    out.push_back(counts);
  }
  return out;
}

PiecewiseConstant excluded_prevalence(const PopulationHistory& history, int subject, int state) {
  PiecewiseConstant f;
  int value = 0;
  for (int i = 0; i < history.size(); ++i) {
    if (i != subject && history.initial_states()[i] == state) ++value;
  }
  f.breakpoints.push_back(history.start());
  f.values.push_back(value);
  for (const auto& e : history.events()) {
    if (e.subject == subject) continue;
    value += (e.to == state) - (e.from == state);
    f.breakpoints.push_back(e.time);
    f.values.push_back(value);
  }
  f.breakpoints.push_back(history.end());
  return f;
}

std::vector<int> prevalence_at(const PopulationHistory& history, const ModelSpec& model,
                               std::span<const double> times) {
  std::vector<int> out;
  out.reserve(times.size());
  for (const auto& row : compartment_counts_at(history, times)) out.push_back(row[model.infectious_state()]);
  return out;
}

}  // namespace epibda
