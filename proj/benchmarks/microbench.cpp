#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "bundlesight/datagen.hpp"
#include "bundlesight/em.hpp"
#include "bundlesight/polyhedron.hpp"
#include "bundlesight/sampler.hpp"
#include "bundlesight/types.hpp"

using namespace bundlesight;

namespace {

GaussianParams correlated_params(int d) {
  GaussianParams p;
  p.mu = Eigen::VectorXd::Constant(d, 0.5);
  p.sigma = Eigen::MatrixXd::Identity(d, d) * 2.0;
  for (int i = 0; i + 1 < d; ++i) {
    p.sigma(i, i + 1) = 0.5;
    p.sigma(i + 1, i) = 0.5;
  }
  return p;
}

PriceMenu demo_menu(int d) {
  PriceMenu menu;
  for (int i = 0; i < d; ++i) menu.entries.push_back({Bundle::single(i, d), 0.4});
  Bundle all = Bundle::from_bitstring(std::string(d, '1'));
  menu.entries.push_back({all, 0.4 * d - 0.3});
  return menu;
}

void bm_truncated_rejection(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GaussianParams params = correlated_params(d);
  const auto regions = build_choice_partition(demo_menu(d), d);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto batch =
        sample_truncated_rejection(regions[1], params, 200, ++seed);
    benchmark::DoNotOptimize(batch.points.data());
  }
}
BENCHMARK(bm_truncated_rejection)->Arg(2)->Arg(4)->Arg(6);

void bm_pool_collect(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GaussianParams params = correlated_params(d);
  const SharedPool pool(params, 100000, 7);
  const auto regions = build_choice_partition(demo_menu(d), d);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out;
  std::uint64_t start = 0;
  for (auto _ : state) {
    pool.collect(regions[1], 200, start += 977, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bm_pool_collect)->Arg(2)->Arg(4)->Arg(6);

void bm_region_probability(benchmark::State& state) {
  const GaussianParams params = correlated_params(4);
  const auto regions = build_choice_partition(demo_menu(4), 4);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        region_probability(regions[0], params, 20000, ++seed));
  }
}
BENCHMARK(bm_region_probability);

void bm_build_partition(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const PriceMenu menu = demo_menu(d);
  for (auto _ : state) {
    const auto regions = build_choice_partition(menu, d);
    benchmark::DoNotOptimize(regions.data());
  }
}
BENCHMARK(bm_build_partition)->Arg(2)->Arg(6);

void bm_m_step(benchmark::State& state) {
  GenSpec spec;
  spec.product_count = 4;
  spec.n_transactions = 500;
  spec.seed = 3;
  const Dataset data = generate_dataset(spec).dataset;
  EmConfig config;
  config.mc_samples = 200;
  config.seed = 4;
  const auto batches = e_step(data, default_init(data), config, 0);
  for (auto _ : state) {
    const GaussianParams params = m_step(batches);
    benchmark::DoNotOptimize(params.mu.data());
  }
}
BENCHMARK(bm_m_step);

void bm_em_iteration(benchmark::State& state) {
  GenSpec spec;
  spec.product_count = 4;
  spec.n_transactions = 500;
  spec.seed = 3;
  const Dataset data = generate_dataset(spec).dataset;
  EmConfig config;
  config.mc_samples = 200;
  config.seed = 4;
  const GaussianParams init = default_init(data);
  int iteration = 0;
  for (auto _ : state) {
    const auto batches = e_step(data, init, config, iteration++);
    const GaussianParams params = m_step(batches);
    benchmark::DoNotOptimize(params.sigma.data());
  }
}
BENCHMARK(bm_em_iteration);

}  // namespace

BENCHMARK_MAIN();
