#include <random>

#include <benchmark/benchmark.h>

#include "i2lt/linalg.hpp"
#include "i2lt/solver.hpp"
#include "i2lt/synth.hpp"
#include "i2lt/train.hpp"

namespace {

i2lt::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  i2lt::DenseMatrix m(r, c);
  for (auto& x : m.entries()) x = n(rng);
  return m;
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_matrix(n + n / 3, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(i2lt::linalg::svd(m));
}
BENCHMARK(BM_Svd)->Arg(10)->Arg(30)->Arg(60);

void BM_Svt(benchmark::State& state) {
  const auto m = random_matrix(40, 30, 2);
  for (auto _ : state) benchmark::DoNotOptimize(i2lt::linalg::svt(m, 2.0));
}
BENCHMARK(BM_Svt);

void BM_Gradient(benchmark::State& state) {
  i2lt::eval::SynthConfig cfg;
  cfg.l_pairs = static_cast<std::size_t>(state.range(0));
  const auto ds = i2lt::eval::synth_generate(cfg);
  const auto kernel = i2lt::resolve_kernel(i2lt::Hyperparameters{}, ds.train);
  const auto problem = i2lt::TrainingProblem::binary(ds.train, kernel);
  const auto s = random_matrix(cfg.p, cfg.q, 3) * 0.01;
  const std::vector<double> alpha(problem.alpha_size(), 0.5);
  const i2lt::Hyperparameters h;
  for (auto _ : state) benchmark::DoNotOptimize(i2lt::grad_S(s, alpha, problem, h));
}
BENCHMARK(BM_Gradient)->Arg(500)->Arg(2000);

void BM_TrainDefault(benchmark::State& state) {
  const auto ds = i2lt::eval::synth_generate(i2lt::eval::SynthConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(i2lt::train(ds.train, i2lt::Hyperparameters{}));
}
BENCHMARK(BM_TrainDefault)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
