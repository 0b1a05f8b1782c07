#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "epibda/likelihood.hpp"
#include "epibda/random.hpp"
#include "epibda/simulate.hpp"
#include "fixtures.hpp"

using namespace epibda;

namespace {

PopulationHistory two_subjects() {
  return fixture::history_from_paths(3, 0.0, 1.0, {SubjectPath{0, {}}, SubjectPath{1, {{0.4, 2}}}});
}

// Same likelihood evaluated on the lumped event sequence: identities are
// discarded and every event contributes the lumped rate divided by the
// number of subjects that could have made it.
double lumped_loglik(const PopulationHistory& h, const Parameters& theta, const ModelSpec& model) {
  const LumpedPath path = lump(h, model);
  std::vector<int> counts = path.initial_counts;
  double out = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > 0) out += counts[s] * std::log(theta.p_init[s]);
  }
  double t = path.start;
  std::vector<double> hazard(model.transitions().size());
  auto total_rate = [&] {
    transition_hazards(model, theta, counts, hazard);
    double r = 0.0;
    for (std::size_t k = 0; k < hazard.size(); ++k) r += hazard[k] * counts[model.transitions()[k].from];
    return r;
  };
  for (const auto& e : path.events) {
    out -= total_rate() * (e.time - t);
    const auto& tr = model.transitions()[static_cast<std::size_t>(e.transition)];
    out += std::log(hazard[static_cast<std::size_t>(e.transition)]);
    --counts[static_cast<std::size_t>(tr.from)];
    ++counts[static_cast<std::size_t>(tr.to)];
    t = e.time;
  }
  out -= total_rate() * (path.end - t);
  return out;
}

}  // namespace

TEST(Likelihood, TwoSubjectHandValue) {
  const auto model = ModelSpec::sir();
  const Parameters theta = fixture::sir_parameters(1.0, 2.0, 0.5, {0.7, 0.2, 0.1});
  const double expected = std::log(0.7) + std::log(0.2) + std::log(2.0) - 0.4 * (1.0 * 1 * 1 + 2.0 * 1) - 0.6 * 0.0;
  EXPECT_NEAR(ctmc_loglik(two_subjects(), theta, model), expected, 1e-12);
}

TEST(Likelihood, EqualsLumpedEvaluation) {
  Rng rng = make_rng(5);
  for (const auto& model : {ModelSpec::sir(), ModelSpec::seir(), ModelSpec::sirs()}) {
    Parameters theta;
    theta.beta = 0.3;
    theta.gamma = 0.4;
    theta.mu = 0.5;
    theta.rho = 0.5;
    theta.p_init = model.num_states() == 4 ? std::vector<double>{0.6, 0.1, 0.2, 0.1}
                                           : std::vector<double>{0.6, 0.3, 0.1};
    for (int rep = 0; rep < 5; ++rep) {
      const auto h = fixture::random_history(model, theta, 10, 0.0, 4.0, rng);
      EXPECT_NEAR(ctmc_loglik(h, theta, model), lumped_loglik(h, theta, model), 1e-9) << model.name();
    }
  }
}

TEST(Likelihood, ImpossibleInfectionIsMinusInfinity) {
  // S -> I while no one else is infectious has zero rate.
  const auto h = fixture::history_from_paths(3, 0.0, 1.0, {SubjectPath{0, {{0.5, 1}}}, SubjectPath{0, {}}});
  const Parameters theta = fixture::sir_parameters(1.0, 1.0, 0.5, {0.5, 0.5, 0.0});
  EXPECT_EQ(ctmc_loglik(h, theta, ModelSpec::sir()), kNegInf);
}

TEST(Likelihood, DataTermsUseLeftLimits) {
  const auto model = ModelSpec::sir();
  const Parameters theta = fixture::sir_parameters(1.0, 2.0, 0.5, {0.7, 0.2, 0.1});
  const Dataset data{{0.0, 0.4, 1.0}, {1, 1, 0}, 2};
  // I = 1 at 0.0 and (left limit) at 0.4, 0 at 1.0
  const double expected = 2 * std::log(0.5);
  EXPECT_NEAR(data_loglik(two_subjects(), data, theta, model, EmissionKind::Binomial), expected, 1e-12);
  EXPECT_NEAR(complete_data_loglik(two_subjects(), data, theta, model, EmissionKind::Binomial),
              expected + ctmc_loglik(two_subjects(), theta, model), 1e-12);
}

TEST(SufficientStatistics, EmptyHistory) {
  const auto h = fixture::history_from_paths(3, 1.0, 3.5, {SubjectPath{0, {}}, SubjectPath{0, {}}, SubjectPath{1, {}}});
  const auto stats = sufficient_statistics(h, ModelSpec::sir());
  EXPECT_EQ(stats.counts, (std::vector<int>{0, 0}));
  EXPECT_NEAR(stats.exposure[0], 2.5 * 2 * 1, 1e-12);
  EXPECT_NEAR(stats.exposure[1], 2.5 * 1, 1e-12);
}

TEST(SufficientStatistics, TwoSubjectHandValues) {
  const auto stats = sufficient_statistics(two_subjects(), ModelSpec::sir());
  EXPECT_EQ(stats.counts, (std::vector<int>{0, 1}));
  EXPECT_NEAR(stats.exposure[0], 0.4, 1e-12);
  EXPECT_NEAR(stats.exposure[1], 0.4, 1e-12);
}

TEST(SufficientStatistics, MatchRiemannSum) {
  // Event times on a dyadic grid make a midpoint Riemann sum exact up to
  // rounding.
  Rng rng = make_rng(17);
  for (const auto& model : {ModelSpec::sir(), ModelSpec::seir(), ModelSpec::sirs()}) {
    Parameters theta;
    theta.beta = 0.4;
    theta.gamma = 0.6;
    theta.mu = 0.5;
    theta.rho = 0.5;
    theta.p_init = model.num_states() == 4 ? std::vector<double>{0.6, 0.1, 0.2, 0.1}
                                           : std::vector<double>{0.6, 0.3, 0.1};
    auto h = fixture::random_history(model, theta, 12, 0.0, 4.0, rng);
    std::vector<Event> events;
    double last = 0.0;
    for (Event e : h.events()) {
      e.time = std::max(last + 1.0 / 256, std::round(e.time * 256) / 256);
      if (e.time >= 4.0) break;
      events.push_back(e);
      last = e.time;
    }
    // Keep each subject's path consistent after truncation.
    std::vector<int> state = h.initial_states();
    std::vector<Event> kept;
    for (const Event& e : events) {
      if (state[static_cast<std::size_t>(e.subject)] != e.from) continue;
      state[static_cast<std::size_t>(e.subject)] = e.to;
      kept.push_back(e);
    }
    const PopulationHistory dyadic(h.num_states(), 0.0, 4.0, h.initial_states(), kept);
    dyadic.check(model);
    const auto stats = sufficient_statistics(dyadic, model);

    const int cells = 4 * 1024;
    const double width = 4.0 / cells;
    std::vector<double> riemann(model.transitions().size(), 0.0);
    const int infectious = model.infectious_state();
    for (int c = 0; c < cells; ++c) {
      const auto counts = compartment_counts(dyadic, (c + 0.5) * width);
      for (std::size_t k = 0; k < model.transitions().size(); ++k) {
        const auto& tr = model.transitions()[k];
        double v = counts[static_cast<std::size_t>(tr.from)];
        if (tr.form == RateForm::InfectiveContact) v *= counts[static_cast<std::size_t>(infectious)];
        riemann[k] += v * width;
      }
    }
    for (std::size_t k = 0; k < riemann.size(); ++k) EXPECT_NEAR(stats.exposure[k], riemann[k], 1e-9) << model.name();
  }
}
