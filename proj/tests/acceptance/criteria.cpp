#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "epibda/diagnostics.hpp"
#include "epibda/engine.hpp"
#include "epibda/gibbs.hpp"
#include "epibda/io.hpp"
#include "epibda/likelihood.hpp"
#include "epibda/pmmh.hpp"
#include "epibda/proposal.hpp"
#include "epibda/simulate.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace epibda::acceptance {
namespace {

std::string format(const char* fmt, ...) {
  char buffer[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof buffer, fmt, args);
  va_end(args);
  return buffer;
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * uniform_open(rng));
}

using Column = std::vector<double>;

Column column(const std::vector<Parameters>& draws, double Parameters::*field) {
  Column out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.*field);
  return out;
}

// --- 1 -----------------------------------------------------------------

CriterionResult forward_backward_exactness() {
  Rng rng = make_rng(101);
  const auto model = ModelSpec::sir();
  const Parameters theta = fixture::sir_parameters(0.7, 0.5, 0.65, {0.45, 0.4, 0.15});
  const auto history = fixture::history_from_paths(
      3, 0.0, 3.0, {SubjectPath{0, {{0.6, 1}, {2.2, 2}}}, SubjectPath{1, {{1.4, 2}}}, SubjectPath{0, {}}});
  const Dataset data{{0.0, 1.5, 3.0}, {1, 1, 0}, 3};

  double worst = 0.0;
  for (int subject = 0; subject < 3; ++subject) {
    const auto law = oracle::subject_sequence_law(history, subject, data, theta, model, EmissionKind::Binomial);
    std::vector<std::vector<double>> expected(3, std::vector<double>(3, 0.0));
    for (std::size_t code = 0; code < law.size(); ++code) {
      expected[0][code / 9] += law[code];
      expected[1][(code / 3) % 3] += law[code];
      expected[2][code % 3] += law[code];
    }
    DecompositionCache cache(model, theta);
    const auto partition = build_partition(history, subject, data, model);
    const auto transitions = partition_transitions(partition, cache);
    const int reps = 100000;
    std::vector<std::vector<long>> counts(3, std::vector<long>(3, 0));
    for (int r = 0; r < reps; ++r) {
      const auto draw =
          hmm_sample_observation_states(partition, transitions, data, theta, model, EmissionKind::Binomial, rng);
      if (!draw) return {false, "HMM found no compatible sequence"};
      for (std::size_t l = 0; l < 3; ++l) ++counts[l][static_cast<std::size_t>(draw->states[l])];
    }
    for (std::size_t l = 0; l < 3; ++l) {
      for (std::size_t s = 0; s < 3; ++s) {
        const double p = expected[l][s];
        const double freq = static_cast<double>(counts[l][s]) / reps;
        if (p == 0.0) {
          if (freq != 0.0) return {false, "state with zero posterior mass was sampled"};
          continue;
        }
        worst = std::max(worst, std::abs(freq - p) / std::sqrt(p * (1 - p) / reps));
      }
    }
  }
  return {worst < 3.0, format("max |freq - exact| = %.2f MC SE over 3 subjects x 3 times x 3 states (limit 3)", worst)};
}

// --- 2 -----------------------------------------------------------------

CriterionResult transition_matrix_correctness() {
  Rng rng = make_rng(202);
  const ModelSpec models[] = {ModelSpec::sir(), ModelSpec::seir(), ModelSpec::sirs()};
  double max_oracle = 0.0;
  double max_ck = 0.0;
  double max_row = 0.0;
  double min_entry = 1.0;
  int complex_cases = 0;
  for (int i = 0; i < 200; ++i) {
    const ModelSpec& model = models[i % 3];
    Parameters theta;
    theta.beta = log_uniform(rng, 1e-3, 2.0);
    theta.gamma = log_uniform(rng, 1e-2, 5.0);
    theta.mu = log_uniform(rng, 1e-2, 5.0);
    theta.rho = 0.5;
    theta.p_init.assign(static_cast<std::size_t>(model.num_states()), 1.0 / model.num_states());
    const int others = static_cast<int>(uniform_open(rng) * 21);
    const double dt = log_uniform(rng, 1e-3, 20.0);
    const auto rates = build_subject_rate_matrix(model, theta, others);
    const TransitionMatrix p = transition_matrix(rates, dt);
    const Eigen::MatrixXd exact = oracle::expm(oracle::subject_generator(model, theta, others), dt, 30);
    max_oracle = std::max(max_oracle, (Eigen::MatrixXd(p) - exact).cwiseAbs().maxCoeff());

    const double split = dt * uniform_open(rng);
    const TransitionMatrix ck = transition_matrix(rates, split) * transition_matrix(rates, dt - split);
    max_ck = std::max(max_ck, (ck - p).cwiseAbs().maxCoeff());

    if (model.kind() == ModelKind::SIRS) {
      const auto eig = eigen_decompose(rates);
      if (eig && eig->imag.cwiseAbs().maxCoeff() > 0.0) {
        ++complex_cases;
        for (Eigen::Index r = 0; r < p.rows(); ++r) max_row = std::max(max_row, std::abs(p.row(r).sum() - 1.0));
        min_entry = std::min(min_entry, p.minCoeff());
      }
    }
  }
  const bool pass = max_oracle < 1e-9 && max_ck < 1e-9 && max_row < 1e-10 && min_entry >= 0.0 && complex_cases > 0;
  return {pass, format("max |P - oracle| = %.2e, CK residual = %.2e, %d complex-pair SIRS cases with row-sum error "
                       "%.2e and min entry %.2e",
                       max_oracle, max_ck, complex_cases, max_row, min_entry)};
}

// --- 3 -----------------------------------------------------------------

CriterionResult bridge_sampler_agreement() {
  Rng rng = make_rng(303);
  const auto model = ModelSpec::sir();
  Parameters theta = fixture::sir_parameters(1.0, 2.0, 0.5, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  BridgeProblem problem{build_subject_rate_matrix(model, theta, 1), 1.0, 0, 2, std::nullopt};
  const int reps = 100000;
  const int bins = 20;
  const int max_jumps = 6;
  auto category = [&](const SubjectPath& path) {
    const int jumps = std::min(static_cast<int>(path.jumps.size()), max_jumps);
    const int bin = path.jumps.empty() ? 0 : std::min(bins - 1, static_cast<int>(path.jumps.front().time * bins));
    return jumps * bins + bin;
  };
  std::vector<long> mr((max_jumps + 1) * bins, 0);
  std::vector<long> un((max_jumps + 1) * bins, 0);
  for (int r = 0; r < reps; ++r) {
    const auto path = modified_rejection_bridge(problem, rng);
    if (!path) return {false, "modified rejection exhausted its budget"};
    ++mr[static_cast<std::size_t>(category(*path))];
    ++un[static_cast<std::size_t>(category(uniformization_bridge(problem, rng)))];
  }
  const double tv = oracle::total_variation(oracle::frequencies(mr), oracle::frequencies(un));
  return {tv < 0.02, format("TV(modified rejection, uniformization) = %.4f on (jump count, 20 first-jump bins) "
                            "(limit 0.02)",
                            tv)};
}

// --- 4 -----------------------------------------------------------------

CriterionResult lumpability() {
  Rng rng = make_rng(404);
  const auto model = ModelSpec::sir();
  const Parameters theta = fixture::sir_parameters(0.6, 0.8, 0.5, {0.5, 0.5, 0.0});
  const double end = 2.5;
  const auto chain = oracle::count_chain(model, theta, 4);
  Eigen::RowVectorXd init = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(chain.configs.size()));
  init(chain.find({3, 1, 0})) = 1.0;
  const Eigen::RowVectorXd law = init * oracle::expm(chain.generator, end);

  const long reps = 100000;
  std::vector<long> config_counts(chain.configs.size(), 0);
  for (long r = 0; r < reps; ++r) {
    const auto h = simulate_subject_level(model, theta, {0, 0, 0, 1}, 0.0, end, rng);
    ++config_counts[static_cast<std::size_t>(chain.find(compartment_counts(h, end)))];
  }
  const auto freq = oracle::frequencies(config_counts);
  std::vector<double> exact(law.data(), law.data() + law.size());
  std::vector<double> size_freq(5, 0.0), size_exact(5, 0.0);
  for (std::size_t c = 0; c < chain.configs.size(); ++c) {
    const auto final_size = static_cast<std::size_t>(4 - chain.configs[c][0]);
    size_freq[final_size] += freq[c];
    size_exact[final_size] += exact[c];
  }
  const double tv_size = oracle::total_variation(size_freq, size_exact);
  const double tv_config = oracle::total_variation(freq, exact);
  return {tv_size < 0.02 && tv_config < 0.02,
          format("TV final size = %.4f, TV final configuration = %.4f (limit 0.02)", tv_size, tv_config)};
}

// --- 5 -----------------------------------------------------------------

struct GewekeStats {
  std::vector<Column> values{8};

  void record(const Parameters& theta, int infected_t2) {
    const double x[4] = {theta.beta, theta.mu, theta.rho, static_cast<double>(infected_t2)};
    for (int k = 0; k < 4; ++k) {
      values[static_cast<std::size_t>(k)].push_back(x[k]);
      values[static_cast<std::size_t>(k + 4)].push_back(x[k] * x[k]);
    }
  }
};

CriterionResult geweke() {
  const auto model = ModelSpec::sir();
  const auto emission = EmissionKind::Binomial;
  const int n = 5;
  const std::vector<double> times{0.0, 1.0, 2.0};
  PriorSpec priors;
  priors.beta = {4.0, 8.0};
  priors.mu = {4.0, 8.0};
  priors.rho = {4.0, 4.0};
  priors.p_init_alpha = {3.0, 2.0, 1.0};

  auto draw_joint = [&](Rng& rng, Parameters& theta, PopulationHistory& h, Dataset& data) {
    theta = priors.sample(model, emission, rng);
    std::vector<int> initial(n);
    for (auto& s : initial) s = categorical(rng, theta.p_init);
    h = simulate_subject_level(model, theta, initial, times.front(), times.back(), rng);
    data = sample_observations(h, model, times, theta, emission, rng);
  };

  GewekeStats marginal;
  Rng rng_m = make_rng(505, 0);
  const long marginal_draws = 100000;
  for (long r = 0; r < marginal_draws; ++r) {
    Parameters theta;
    PopulationHistory h;
    Dataset data;
    draw_joint(rng_m, theta, h, data);
    marginal.record(theta, prevalence_at(h, model, times)[1]);
  }

  GewekeStats successive;
  Rng rng = make_rng(505, 1);
  Parameters theta;
  PopulationHistory h;
  Dataset data;
  draw_joint(rng, theta, h, data);
  DecompositionCache cache(model, theta);
  const BridgeSampler sampler = default_bridge_sampler(model);
  const auto started = std::chrono::steady_clock::now();
  const double ess_target = 10000.0;
  double min_ess = 0.0;
  long iterations = 0;
  while (min_ess < ess_target && iterations < 5'000'000) {
    for (long block = 0; block < 100000; ++block, ++iterations) {
      for (int j = 0; j < n; ++j) update_subject(h, j, data, theta, model, emission, sampler, cache, rng);
      update_rate_params(sufficient_statistics(h, model), model, priors, theta, rng);
      const auto infected = prevalence_at(h, model, times);
      theta.rho = update_rho_binomial(infected, data.counts, priors.rho, rng);
      theta.p_init = update_p_t1(h.initial_counts(), priors.p_init_alpha, rng);
      cache.reset(theta);
      for (std::size_t l = 0; l < times.size(); ++l) data.counts[l] = binomial(rng, infected[l], theta.rho);
      successive.record(theta, infected[1]);
    }
    min_ess = ess_target * 10;
    for (const auto& v : successive.values) min_ess = std::min(min_ess, ess(v).ess);
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() > 700.0) break;
  }

  static const char* const names[8] = {"beta", "mu", "rho", "I(t2)", "beta^2", "mu^2", "rho^2", "I(t2)^2"};
  double worst = 0.0;
  std::string detail;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& a = marginal.values[k];
    const auto& b = successive.values[k];
    const double se = std::sqrt(var_of(a) / ess(a).ess + var_of(b) / ess(b).ess);
    const double z = (mean_of(a) - mean_of(b)) / se;
    worst = std::max(worst, std::abs(z));
    detail += format("%s z=%+.2f ", names[k], z);
  }
  const bool pass = worst < 4.0 && min_ess >= ess_target;
  return {pass, detail + format("| max |z| = %.2f (limit 4), %ld MCMC iterations, min ESS %.0f (need 1e4), "
                                "%ld independent draws",
                                worst, iterations, min_ess, marginal_draws)};
}

// --- 6 -----------------------------------------------------------------

struct Interval {
  double lo;
  double median;
  double hi;
};

Interval credible(const Column& x) {
  return {empirical_quantile(x, 0.025), empirical_quantile(x, 0.5), empirical_quantile(x, 0.975)};
}

CriterionResult simulation_reproduction() {
  const auto model = ModelSpec::sir();
  const int n = 200;
  const Parameters truth = fixture::sir_parameters(0.00035, 0.14, 0.2, {0.9, 0.03, 0.07});
  Rng rng = make_rng(606);
  const auto path = gillespie_simulate(model, truth, multinomial(rng, n, truth.p_init), 0.0, 119.0, rng);
  const auto history = disaggregate(model, path, rng);
  const auto times = fixture::grid(0.0, 119.0, 7.0);
  const Dataset data = sample_observations(history, model, times, truth, EmissionKind::Binomial, rng);

  RunConfig config;
  config.population = n;
  config.iterations = 20000;
  config.burn_in = 2000;
  config.thin = 1000;
  config.subjects_per_iter = 20;
  config.seed = 6;
  config.init_attempts = 1'000'000;
  config.priors.beta = {0.3, 1000.0};
  config.priors.mu = {1.0, 8.0};
  config.priors.rho = {2.0, 7.0};
  config.priors.p_init_alpha = {90.0, 2.0, 5.0};
  config.initial = fixture::sir_parameters(0.0003, 0.12, 0.25, {0.9, 0.03, 0.07});
  config.validate();
  const auto out = run_chain(config, data, 0);

  std::vector<Column> columns{column(out.draws, &Parameters::beta), column(out.draws, &Parameters::mu),
                              column(out.draws, &Parameters::rho)};
  for (std::size_t k = 0; k < 3; ++k) {
    Column p;
    for (const auto& d : out.draws) p.push_back(d.p_init[k]);
    columns.push_back(std::move(p));
  }
  const double truths[6] = {truth.beta, truth.mu, truth.rho, truth.p_init[0], truth.p_init[1], truth.p_init[2]};
  static const char* const names[6] = {"beta", "mu", "rho", "p_S", "p_I", "p_R"};
  bool covered = true;
  std::string detail;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto ci = credible(columns[k]);
    const bool inside = ci.lo <= truths[k] && truths[k] <= ci.hi;
    covered = covered && inside;
    detail += format("%s %.3g in [%.3g, %.3g]%s; ", names[k], truths[k], ci.lo, ci.hi, inside ? "" : " MISSED");
  }
  const double acceptance = static_cast<double>(out.accepted) / static_cast<double>(out.proposals);
  const bool rate_ok = acceptance >= 0.85 && acceptance <= 0.97;
  int infections = 0;
  for (const auto& e : path.events) infections += e.transition == 0;
  return {covered && rate_ok,
          detail + format("path acceptance %.3f (band [0.85, 0.97]); true R0 = beta N / mu = %.2f, simulated data had "
                          "%d infections",
                          acceptance, truth.beta * n / truth.mu, infections)};
}

// --- 7 -----------------------------------------------------------------

CriterionResult boarding_school() {
  const auto model = ModelSpec::sir();
  const int n = 763;
  const Dataset data = read_dataset_csv(std::string(EPIBDA_DATA_DIR) + "/boarding_school.csv", n);
  RunConfig config;
  config.population = n;
  config.iterations = 20000;
  config.burn_in = 2000;
  config.thin = 1000;
  config.chains = 3;
  config.seed = 1978;
  config.init_attempts = 5'000'000;
  config.priors.beta = {0.001, 1.0};
  config.priors.mu = {1.0, 2.0};
  config.priors.rho = {1.0, 2.0};
  config.priors.p_init_alpha = {900.0, 3.0, 9.0};
  config.initial = fixture::sir_parameters(0.0025, 0.45, 0.95, {0.985, 0.004, 0.011});
  config.validate();
  const auto chains = run_chains(config, data);

  Column r0, period, rho;
  long accepted = 0, proposals = 0;
  for (const auto& c : chains) {
    for (const auto& d : c.draws) {
      r0.push_back(d.beta * n / d.mu);
      period.push_back(1.0 / d.mu);
      rho.push_back(d.rho);
    }
    accepted += c.accepted;
    proposals += c.proposals;
  }
  const auto r0_ci = credible(r0);
  const auto period_ci = credible(period);
  const auto rho_ci = credible(rho);
  const bool pass = r0_ci.median >= 3.2 && r0_ci.median <= 4.7 && period_ci.median >= 1.9 &&
                    period_ci.median <= 2.5 && rho_ci.median > 0.9;
  return {pass, format("median R0 %.3f (%.2f, %.2f) in [3.2, 4.7]; median infectious period %.3f d (%.2f, %.2f) in "
                       "[1.9, 2.5]; median rho %.3f > 0.9; %d subjects/iter, path acceptance %.3f",
                       r0_ci.median, r0_ci.lo, r0_ci.hi, period_ci.median, period_ci.lo, period_ci.hi, rho_ci.median,
                       config.resolved_subjects_per_iter(n),
                       static_cast<double>(accepted) / static_cast<double>(proposals))};
}

// --- 8 -----------------------------------------------------------------

CriterionResult cross_method_agreement() {
  const auto model = ModelSpec::sir();
  const int n = 100;
  const Parameters truth = fixture::sir_parameters(0.003, 0.15, 0.5, {0.93, 0.05, 0.02});
  Rng rng = make_rng(808);
  const auto path = gillespie_simulate(model, truth, multinomial(rng, n, truth.p_init), 0.0, 30.0, rng);
  const auto history = disaggregate(model, path, rng);
  const Dataset data =
      sample_observations(history, model, fixture::grid(0.0, 30.0, 2.0), truth, EmissionKind::Binomial, rng);

  RunConfig config;
  config.population = n;
  config.iterations = 20000;
  config.burn_in = 2000;
  config.thin = 1000;
  config.subjects_per_iter = 10;
  config.seed = 8;
  config.init_attempts = 1'000'000;
  config.priors.beta = {1.0, 300.0};
  config.priors.mu = {1.0, 5.0};
  config.priors.rho = {2.0, 2.0};
  config.priors.p_init_alpha = {93.0, 5.0, 2.0};
  config.initial = truth;
  config.validate();
  const auto bda = run_chain(config, data, 0);

  config.method = Method::Pmmh;
  config.pmmh.iterations = config.iterations;
  config.pmmh.pilot = 3000;
  config.pmmh.filter = FilterConfig{500, PathSimulator::Exact, 1.0};
  const auto pmmh = run_chain(config, data, 0);

  static const char* const names[3] = {"beta", "mu", "rho"};
  double Parameters::*fields[3] = {&Parameters::beta, &Parameters::mu, &Parameters::rho};
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 3; ++k) {
    const Column a = column(bda.draws, fields[k]);
    const Column b = column(pmmh.draws, fields[k]);
    const double pooled_sd = std::sqrt(0.5 * (var_of(a) + var_of(b)));
    const double gap = std::abs(empirical_quantile(a, 0.5) - empirical_quantile(b, 0.5)) / pooled_sd;
    pass = pass && gap < 1.0;
    detail += format("%s medians %.4g vs %.4g (%.2f SD); ", names[k], empirical_quantile(a, 0.5),
                     empirical_quantile(b, 0.5), gap);
  }
  return {pass, detail + format("PMMH acceptance %.3f, BDA path acceptance %.3f (limit 1 SD)",
                                static_cast<double>(pmmh.accepted) / static_cast<double>(pmmh.proposals),
                                static_cast<double>(bda.accepted) / static_cast<double>(bda.proposals))};
}

// --- 9 -----------------------------------------------------------------

CriterionResult pmmh_unbiasedness() {
  Rng rng = make_rng(909);
  const auto model = ModelSpec::sir();
  const Parameters theta = fixture::sir_parameters(0.8, 0.6, 0.6, {0.5, 0.3, 0.2});
  const Dataset data{{0.0, 1.5}, {1, 1}, 3};
  const double exact = oracle::exact_likelihood(model, theta, data, EmissionKind::Binomial);
  const FilterConfig filter{50, PathSimulator::Exact, 1.0};
  const int runs = 10000;
  Column z(runs);
  for (auto& v : z) v = std::exp(bootstrap_loglik(model, data, theta, EmissionKind::Binomial, filter, rng));
  const double mean = mean_of(z);
  const double se = std::sqrt(var_of(z) / runs);
  const double dev = std::abs(mean - exact) / se;
  return {dev < 3.0, format("mean estimate %.6f vs exact %.6f: %.2f MC SE (limit 3), %d particles, %d runs", mean,
                            exact, dev, filter.particles, runs)};
}

const Criterion kCriteria[] = {
    {1, "forward-backward exactness", 10.0, forward_backward_exactness},
    {2, "transition-matrix correctness", 5.0, transition_matrix_correctness},
    {3, "bridge-sampler agreement", 60.0, bridge_sampler_agreement},
    {4, "lumpability", 60.0, lumpability},
    {5, "joint-distribution test", 900.0, geweke},
    {6, "simulation reproduction", 1800.0, simulation_reproduction},
    {7, "boarding-school reproduction", 7200.0, boarding_school},
    {8, "cross-method agreement", 3600.0, cross_method_agreement},
    {9, "particle-filter unbiasedness", 300.0, pmmh_unbiasedness},
};

}  // namespace

const Criterion* criteria_begin() { return std::begin(kCriteria); }
const Criterion* criteria_end() { return std::end(kCriteria); }

}  // namespace epibda::acceptance
