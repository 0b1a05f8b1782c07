#include "epibda/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace epibda {

namespace {

int draw_destination(const RateMatrix& rates, int from, Rng& rng) {
  double weights[kMaxStates] = {0.0, 0.0, 0.0, 0.0};
  const auto n = static_cast<std::size_t>(rates.cols());
  for (std::size_t s = 0; s < n; ++s) {
    if (static_cast<int>(s) != from) weights[s] = rates(from, static_cast<Eigen::Index>(s));
  }
  return categorical(rng, std::span<const double>(weights, n));
}

double endpoint_probability(const BridgeProblem& problem) {
  if (problem.tpm) return (*problem.tpm)(problem.start, problem.end);
  return transition_matrix(problem.rates, problem.length)(problem.start, problem.end);
}

void check_problem(const BridgeProblem& problem) {
  const auto n = problem.rates.rows();
  if (problem.start < 0 || problem.start >= n || problem.end < 0 || problem.end >= n) {
    throw std::invalid_argument("bridge: endpoint state out of range");
  }
  if (!(problem.length >= 0.0)) throw std::invalid_argument("bridge: negative interval length");
  if (!(endpoint_probability(problem) > 0.0)) {
    throw std::invalid_argument("bridge: endpoint states " + std::to_string(problem.start) + " -> " +
                                std::to_string(problem.end) + " have zero transition probability");
  }
}

struct UniformizationTable {
  double dominating_rate = 0.0;
  RateMatrix jump_chain;
  std::vector<double> pmf;
  // columns[m] = R^m e_end
  std::vector<StateVector> columns;
};

UniformizationTable build_uniformization(const BridgeProblem& problem) {
  const Eigen::Index n = problem.rates.rows();
  UniformizationTable table;
  table.dominating_rate = (-problem.rates.diagonal()).maxCoeff();
  if (!(table.dominating_rate > 0.0)) {
    table.pmf = {1.0};
    table.columns.push_back(StateVector::Unit(n, problem.end));
    return table;
  }
  const double mu = table.dominating_rate;
  const double mean = mu * problem.length;
  table.jump_chain = RateMatrix::Identity(n, n) + problem.rates / mu;
  const double target = endpoint_probability(problem);
  const long cap = static_cast<long>(std::ceil(10.0 * mean)) + 50;

  StateVector column = StateVector::Unit(n, problem.end);
  const double log_mean = mean > 0.0 ? std::log(mean) : kNegInf;
  double cumulative = 0.0;
  for (long k = 0; k <= cap; ++k) {
    if (k > 0) column = (table.jump_chain * column).eval();
    table.columns.push_back(column);
    const double reach = column(problem.start);
    double weight = 0.0;
    if (reach > 0.0) {
      const double log_poisson = k == 0 ? -mean : -mean + k * log_mean - std::lgamma(k + 1.0);
      weight = std::exp(log_poisson + std::log(reach));
    }
    table.pmf.push_back(weight);
    cumulative += weight;
    if (cumulative >= (1.0 - 1e-10) * target) break;
  }
  if (!(cumulative > 0.0)) throw std::runtime_error("uniformization: jump-count law has no mass");
  for (auto& w : table.pmf) w /= cumulative;
  return table;
}

}  // namespace

BridgeSampler bridge_sampler_from_name(std::string_view name) {
  if (name == "mr" || name == "modified-rejection" || name == "modified_rejection") {
    return BridgeSampler::ModifiedRejection;
  }
  if (name == "unif" || name == "uniformization") return BridgeSampler::Uniformization;
  throw std::invalid_argument("unknown bridge sampler '" + std::string(name) + "'");
}

std::string_view bridge_sampler_name(BridgeSampler sampler) {
  return sampler == BridgeSampler::ModifiedRejection ? "modified-rejection" : "uniformization";
}

BridgeSampler default_bridge_sampler(const ModelSpec& model) {
  return model.kind() == ModelKind::SEIR ? BridgeSampler::Uniformization : BridgeSampler::ModifiedRejection;
}

SubjectPath forward_simulate_subject(const RateMatrix& rates, int start, double length, Rng& rng) {
  SubjectPath path{start, {}};
  int state = start;
  double t = 0.0;
  while (true) {
    const double exit = -rates(state, state);
    if (!(exit > 0.0)) break;
    t += exponential(rng, exit);
    if (!(t < length)) break;
    state = draw_destination(rates, state, rng);
    path.jumps.push_back({t, state});
  }
  return path;
}

double sample_first_jump_conditional(double exit_rate, double length, double u) {
  if (!(exit_rate > 0.0)) throw std::invalid_argument("first jump: exit rate must be positive");
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("first jump: u must lie in (0, 1)");
  return -std::log1p(u * std::expm1(-length * exit_rate)) / exit_rate;
}

std::optional<SubjectPath> modified_rejection_bridge(const BridgeProblem& problem, Rng& rng, long max_attempts) {
  check_problem(problem);
  const int a = problem.start;
  const int b = problem.end;
  const double length = problem.length;
  const double exit = -problem.rates(a, a);
  if (a == b && !(exit > 0.0)) return SubjectPath{a, {}};

  for (long attempt = 0; attempt < max_attempts; ++attempt) {
    if (a == b) {
      SubjectPath path = forward_simulate_subject(problem.rates, a, length, rng);
      if (path.end_state() == b) return path;
      continue;
    }
    const double first = sample_first_jump_conditional(exit, length, uniform_open(rng));
    if (!(first > 0.0 && first < length)) continue;
    const int next = draw_destination(problem.rates, a, rng);
    SubjectPath rest = forward_simulate_subject(problem.rates, next, length - first, rng);
    if (rest.end_state() != b) continue;
    SubjectPath path{a, {{first, next}}};
    bool ordered = true;
    for (const auto& j : rest.jumps) {
      const double t = first + j.time;
      if (!(t > path.jumps.back().time && t < length)) {
        ordered = false;
        break;
      }
      path.jumps.push_back({t, j.to});
    }
    if (ordered) return path;
  }
  return std::nullopt;
}

std::vector<double> uniformization_jump_pmf(const BridgeProblem& problem) {
  check_problem(problem);
  return build_uniformization(problem).pmf;
}

SubjectPath uniformization_bridge(const BridgeProblem& problem, Rng& rng) {
  check_problem(problem);
  const UniformizationTable table = build_uniformization(problem);
  const Eigen::Index n_states = problem.rates.rows();
  const int count = categorical(rng, table.pmf);
  if (count <= 0) return SubjectPath{problem.start, {}};

  std::vector<double> times(static_cast<std::size_t>(count));
  while (true) {
    for (auto& t : times) t = uniform_open(rng) * problem.length;
    std::sort(times.begin(), times.end());
    if (std::adjacent_find(times.begin(), times.end()) == times.end() && times.back() < problem.length) break;
  }

  SubjectPath path{problem.start, {}};
  int state = problem.start;
  double weights[kMaxStates];
  for (int i = 1; i <= count; ++i) {
    const StateVector& ahead = table.columns[static_cast<std::size_t>(count - i)];
    for (Eigen::Index x = 0; x < n_states; ++x) weights[x] = table.jump_chain(state, x) * ahead(x);
    const int next = categorical(rng, std::span<const double>(weights, static_cast<std::size_t>(n_states)));
    if (next < 0) throw std::runtime_error("uniformization: no admissible intermediate state");
    if (next != state) path.jumps.push_back({times[static_cast<std::size_t>(i - 1)], next});
    state = next;
  }
  return path;
}

}  // namespace epibda
