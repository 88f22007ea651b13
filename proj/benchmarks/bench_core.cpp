#include <benchmark/benchmark.h>

#include <random>

#include "banditsim/belief.hpp"
#include "banditsim/lasso.hpp"
#include "banditsim/policies.hpp"
#include "banditsim/simulator.hpp"

using namespace banditsim;

namespace {

PatientContext random_context(std::size_t dx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.1);
  PatientContext ctx{"bench", std::vector<double>(dx)};
  for (auto& f : ctx.features) f = coin(rng) ? 1.0 : 0.0;
  return ctx;
}

BeliefState trained_state(const ActionSpace& space, std::size_t dx, int steps) {
  BeliefState s = init_prior(feature_dimension(dx, space), 1.0);
  for (int i = 0; i < steps; ++i) {
    const auto phi = assemble(random_context(dx, static_cast<std::uint64_t>(i)),
                              space.at(static_cast<std::size_t>(i) % space.size()), space);
    s = update(s, phi.phi, i % 3 == 0 ? -1 : 1);
  }
  return s;
}

void BM_Update(benchmark::State& st) {
  const ActionSpace space(20);
  const std::size_t dx = static_cast<std::size_t>(st.range(0));
  const BeliefState s = trained_state(space, dx, 50);
  const auto phi = assemble(random_context(dx, 7), space.at(3), space).phi;
  for (auto _ : st) benchmark::DoNotOptimize(update(s, phi, 1));
}
BENCHMARK(BM_Update)->Arg(31)->Arg(2000);

void BM_Predict(benchmark::State& st) {
  const ActionSpace space(20);
  const BeliefState s = trained_state(space, 31, 50);
  const auto phi = assemble(random_context(31, 7), space.at(3), space).phi;
  for (auto _ : st) benchmark::DoNotOptimize(predict(s, phi));
}
BENCHMARK(BM_Predict);

void BM_ScoreKg(benchmark::State& st) {
  const ActionSpace space(static_cast<int>(st.range(0)));
  const BeliefState s = trained_state(space, 31, 50);
  const auto ctx = random_context(31, 9);
  for (auto _ : st) benchmark::DoNotOptimize(score_kg(s, ctx, space, 100.0, 0.5));
}
BENCHMARK(BM_ScoreKg)->Arg(5)->Arg(20);

void BM_Episode(benchmark::State& st) {
  ExperimentConfig c;
  c.policy.eta = 0.5;
  c.replications = 1;
  for (auto _ : st) benchmark::DoNotOptimize(run_experiment(c, {1, {}}));
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMillisecond);

void BM_LassoPath(benchmark::State& st) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution bit(0.2), coin(0.5), noise(0.2);
  const std::size_t n = 1000, p = static_cast<std::size_t>(st.range(0));
  DesignMatrix x(n, p);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = bit(rng) ? 1.0 : 0.0;
    // Noisy labels keep the unpenalized problem bounded.
    y[i] = ((x(i, 0) > 0.0 || coin(rng)) != noise(rng)) ? 1.0 : 0.0;
  }
  for (auto _ : st) benchmark::DoNotOptimize(lasso_path(x, y));
}
BENCHMARK(BM_LassoPath)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
