#include <benchmark/benchmark.h>

#include "irmc/diagnostics.hpp"
#include "irmc/rng.hpp"

using namespace irmc;

namespace {

Eigen::MatrixXd normals(Eigen::Index n, Eigen::Index d) {
  Rng rng(5);
  Eigen::MatrixXd x(n, d);
  for (auto& e : x.reshaped()) e = rng.normal();
  return x;
}

void BM_EssBartlett(benchmark::State& state) {
  const Eigen::VectorXd x = normals(state.range(0), 1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(essBartlett(x));
}
BENCHMARK(BM_EssBartlett)->Arg(10000)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_EssMbm(benchmark::State& state) {
  const auto x = normals(100000, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(essMbm(x));
}
BENCHMARK(BM_EssMbm)->Arg(2)->Arg(14)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_TvHistogram2d(benchmark::State& state) {
  const auto x = normals(state.range(0), 2);
  const auto t = stdNormalTarget(2);
  const Box box{{-5, 5}, {-5, 5}};
  for (auto _ : state) benchmark::DoNotOptimize(tvHistogram(x, t, box, 100));
}
BENCHMARK(BM_TvHistogram2d)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
