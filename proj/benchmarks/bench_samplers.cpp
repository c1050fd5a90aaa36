#include <benchmark/benchmark.h>

#include "irmc/chain.hpp"
#include "irmc/dataset.hpp"
#include "irmc/dynamics.hpp"
#include "irmc/jump.hpp"
#include "irmc/mala.hpp"
#include "irmc/targets.hpp"

using namespace irmc;

namespace {

const TargetDensity& heart() {
  static const TargetDensity t =
      logisticRegressionTarget(loadStatlogCsv(IRMC_BENCH_DATA_DIR "/heart.dat", -1, true));
  return t;
}

void BM_HeartGradient(benchmark::State& state) {
  const auto& t = heart();
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(t.dim()), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(t.gradient(z));
}
BENCHMARK(BM_HeartGradient);

void BM_MhStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto t = stdNormalTarget(d);
  const auto q = gaussianRandomWalk(2.38 / std::sqrt(static_cast<double>(d)), d);
  Rng rng(1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  double h = t.potential(y);
  for (auto _ : state) {
    auto r = mhStep(y, h, t, *q, rng);
    y = std::move(r.z);
    h = r.potential;
  }
}
BENCHMARK(BM_MhStep)->Arg(2)->Arg(40);

void BM_IJumpStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto t = stdNormalTarget(d);
  const auto p = state.range(1) ? gammaDirectionalProposal(1.1, 0.4, d)
                                : halfSpaceGaussianProposal(2.38 / std::sqrt(static_cast<double>(d)), d);
  Rng rng(2);
  LiftedState s{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), p->sampleAux(rng)};
  double h = t.potential(s.z);
  for (auto _ : state) {
    auto r = iJumpStep(s, h, t, *p, rng);
    s = std::move(r.state);
    h = r.potential;
  }
}
BENCHMARK(BM_IJumpStep)->Args({2, 0})->Args({2, 1})->Args({40, 0})->Args({40, 1});

void BM_HeartChain(benchmark::State& state) {
  SamplerSpec s;
  s.kind = static_cast<SamplerKind>(state.range(0));
  s.eps = s.kind == SamplerKind::HMC ? 0.05 : 0.012;
  const auto d = heart().dim();
  if (s.kind == SamplerKind::IMALA)
    s.dynamics = constantDynamics(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)), blockRotationSkew(d));
  for (auto _ : state) benchmark::DoNotOptimize(runChain(s, heart(), 1000, 0, 3));
  state.SetItemsProcessed(state.iterations() * 1000);
  state.SetLabel(toString(s.kind));
}
BENCHMARK(BM_HeartChain)
    ->Arg(static_cast<int>(SamplerKind::MALA))
    ->Arg(static_cast<int>(SamplerKind::IMALA))
    ->Arg(static_cast<int>(SamplerKind::HMC))
    ->Unit(benchmark::kMillisecond);

}  // namespace
