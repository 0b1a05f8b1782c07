#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "epibda/simulate.hpp"

namespace epibda::fixture {

PopulationHistory history_from_paths(int num_states, double start, double end,
                                     const std::vector<SubjectPath>& paths) {
  std::vector<int> initial;
  std::vector<Event> events;
  for (std::size_t j = 0; j < paths.size(); ++j) {
    initial.push_back(paths[j].start);
    int state = paths[j].start;
    for (const Jump& jump : paths[j].jumps) {
      events.push_back({jump.time, static_cast<int>(j), static_cast<std::uint8_t>(state),
                        static_cast<std::uint8_t>(jump.to)});
      state = jump.to;
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  return PopulationHistory(num_states, start, end, std::move(initial), std::move(events));
}

PopulationHistory random_history(const ModelSpec& model, const Parameters& theta, int population, double start,
                                 double end, Rng& rng) {
  std::vector<int> initial(static_cast<std::size_t>(population));
  for (auto& s : initial) s = categorical(rng, theta.p_init);
  return simulate_subject_level(model, theta, std::move(initial), start, end, rng);
}

Parameters sir_parameters(double beta, double mu, double rho, std::vector<double> p_init) {
  Parameters theta;
  theta.beta = beta;
  theta.mu = mu;
  theta.rho = rho;
  theta.p_init = std::move(p_init);
  return theta;
}

std::vector<double> grid(double start, double end, double step) {
  std::vector<double> out;
  const long n = std::lround((end - start) / step);
  for (long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

}  // namespace epibda::fixture
