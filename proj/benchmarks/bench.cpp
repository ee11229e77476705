// Microbenchmarks for the hot paths: lattice transforms, credit estimators,
// the Gibbs softmax, the mean-field iteration, the quadratic controller fit,
// the flocking step and the ridge solve.

#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "coopfe/apc.hpp"
#include "coopfe/coalition.hpp"
#include "coopfe/gibbs.hpp"
#include "coopfe/meanfield.hpp"
#include "coopfe/rng.hpp"
#include "coopfe/traj.hpp"
#include "coopfe/vicsek.hpp"

namespace {

coopfe::CharacteristicFunction random_game(int n, std::uint64_t seed) {
  coopfe::Rng rng(seed);
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::size_t c = 1; c < v.size(); ++c) v[c] = rng.uniform();
  return coopfe::make_characteristic(n, std::move(v));
}

void bm_mobius(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto v = random_game(n, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coopfe::mobius_dividends(v));
  }
}
BENCHMARK(bm_mobius)->Arg(8)->Arg(12)->Arg(16);

void bm_shapley_exact(benchmark::State& state) {
  const auto v = random_game(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coopfe::shapley_exact(v));
  }
}
BENCHMARK(bm_shapley_exact)->Arg(5)->Arg(7);

void bm_shapley_dividends(benchmark::State& state) {
  const auto v = random_game(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        coopfe::shapley_from_dividends(coopfe::mobius_dividends(v)));
  }
}
BENCHMARK(bm_shapley_dividends)->Arg(8)->Arg(12)->Arg(16);

void bm_shapley_mc(benchmark::State& state) {
  const auto v = random_game(12, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        coopfe::shapley_monte_carlo(v, static_cast<int>(state.range(0)), 3));
  }
}
BENCHMARK(bm_shapley_mc)->Arg(20)->Arg(100);

void bm_gibbs(benchmark::State& state) {
  const auto v = random_game(static_cast<int>(state.range(0)), 7);
  const auto e = coopfe::energy_from_values(v, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coopfe::gibbs_distribution(e));
  }
}
BENCHMARK(bm_gibbs)->Arg(10)->Arg(16);

void bm_meanfield(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  coopfe::Rng rng(11);
  std::vector<double> phi(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> psi(
      static_cast<std::size_t>(n),
      std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (double& x : phi) x = 2.0 * rng.uniform() - 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          psi[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
              0.4 * (2.0 * rng.uniform() - 1.0);
    }
  }
  const auto m = coopfe::make_pairwise_model(phi, psi, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coopfe::meanfield_fixed_point(m, 1e-10, 10000));
  }
}
BENCHMARK(bm_meanfield)->Arg(16)->Arg(64);

void bm_fit_quadratic(benchmark::State& state) {
  coopfe::Rng rng(5);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 50; ++i) {
    const double b = 0.2 + 0.1 * i;
    pts.emplace_back(b, -(b - 3.0) * (b - 3.0) + 0.1 * rng.uniform());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(coopfe::fit_quadratic(pts));
  }
}
BENCHMARK(bm_fit_quadratic);

void bm_flock_step(benchmark::State& state) {
  coopfe::FlockConfig cfg;
  cfg.n_agents = static_cast<int>(state.range(0));
  coopfe::FlockState s = coopfe::init_flock(cfg, 3);
  for (auto _ : state) {
    s = coopfe::step_flock(std::move(s), cfg, 6.0, 0.1);
    benchmark::DoNotOptimize(s.heading.data());
  }
}
BENCHMARK(bm_flock_step)->Arg(100)->Arg(400);

void bm_ridge_fit(benchmark::State& state) {
  coopfe::SyntheticTrajConfig cfg;
  cfg.n_agents = 5;
  const coopfe::TrajTask task = coopfe::synthetic_task(cfg, 5);
  std::vector<coopfe::PredictionSample> train;
  for (const auto& a : task.agents) {
    train.insert(train.end(), a.train.begin(), a.train.end());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(coopfe::fit_predictor(train));
  }
}
BENCHMARK(bm_ridge_fit);

}  // namespace

BENCHMARK_MAIN();
