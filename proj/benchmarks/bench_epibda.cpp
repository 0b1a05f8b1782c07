#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "epibda/ctmc.hpp"
#include "epibda/engine.hpp"
#include "epibda/io.hpp"
#include "epibda/pmmh.hpp"
#include "epibda/proposal.hpp"

using namespace epibda;

namespace {

Parameters sirs_theta() {
  Parameters theta;
  theta.beta = 0.0009;
  theta.mu = 1.0 / 14;
  theta.gamma = 1.0 / 150;
  theta.rho = 0.95;
  theta.p_init = {0.97, 0.02, 0.01};
  return theta;
}

Parameters boarding_theta() {
  Parameters theta;
  theta.beta = 0.0025;
  theta.mu = 0.45;
  theta.rho = 0.95;
  theta.p_init = {0.985, 0.004, 0.011};
  return theta;
}

Dataset boarding_data() { return read_dataset_csv(std::string(EPIBDA_DATA_DIR) + "/boarding_school.csv", 763); }

void BM_EigenTransitionMatrix(benchmark::State& state) {
  const auto model = state.range(0) == 0 ? ModelSpec::sir() : ModelSpec::sirs();
  const auto eig = eigen_decompose(build_subject_rate_matrix(model, sirs_theta(), 40));
  double dt = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_matrix(*eig, dt));
    dt += 1e-9;
  }
}
BENCHMARK(BM_EigenTransitionMatrix)->Arg(0)->Arg(1);

void BM_SeriesTransitionMatrix(benchmark::State& state) {
  const auto rates = build_subject_rate_matrix(ModelSpec::sirs(), sirs_theta(), 40);
  for (auto _ : state) benchmark::DoNotOptimize(series_expm(rates, 0.5));
}
BENCHMARK(BM_SeriesTransitionMatrix);

void BM_Decomposition(benchmark::State& state) {
  const auto rates = build_subject_rate_matrix(ModelSpec::sirs(), sirs_theta(), 40);
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decompose(rates));
}
BENCHMARK(BM_Decomposition);

void BM_SubjectUpdateBoardingSchool(benchmark::State& state) {
  const auto model = ModelSpec::sir();
  const Dataset data = boarding_data();
  const Parameters theta = boarding_theta();
  Rng rng = make_rng(1);
  PopulationHistory history = initialize_paths(model, theta, data, EmissionKind::Binomial, rng, 5'000'000);
  DecompositionCache cache(model, theta);
  int subject = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_subject(history, subject, data, theta, model, EmissionKind::Binomial,
                                            BridgeSampler::ModifiedRejection, cache, rng));
    subject = (subject + 1) % history.size();
  }
}
BENCHMARK(BM_SubjectUpdateBoardingSchool)->Unit(benchmark::kMicrosecond);

void BM_ParticleFilterBoardingSchool(benchmark::State& state) {
  const auto model = ModelSpec::sir();
  const Dataset data = boarding_data();
  Parameters theta = boarding_theta();
  theta.phi = 20.0;
  const FilterConfig config{static_cast<int>(state.range(0)),
                            state.range(1) == 0 ? PathSimulator::Exact : PathSimulator::TauLeap, 1.0 / 12};
  Rng rng = make_rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_loglik(model, data, theta, EmissionKind::NegativeBinomial, config, rng));
  }
}
BENCHMARK(BM_ParticleFilterBoardingSchool)->Args({500, 0})->Args({500, 1})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
