#include <benchmark/benchmark.h>

#include <cmath>

#include "spdhg/problem.hpp"
#include "spdhg/projections.hpp"
#include "spdhg/rng.hpp"
#include "spdhg/solver.hpp"

namespace {

using namespace spdhg;

Dataset bench_dataset(std::int64_t n, std::int64_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triplet> entries;
  std::vector<double> labels(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::int64_t r = 0; r < n; ++r) {
    for (std::int64_t c = 0; c < d; ++c) {
      if (rng.next_double() < 0.2) {
        entries.push_back({r, c, scale * rng.next_gaussian()});
      }
    }
    labels[r] = rng.next_double() < 0.5 ? -1.0 : 1.0;
  }
  if (entries.empty()) entries.push_back({0, 0, 1.0});
  return {CsrMatrix::from_triplets(n, d, entries), labels};
}

ProblemSpec bench_instance(std::int64_t n, std::int64_t d) {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  for (std::int64_t i = 0; i + 1 < d; ++i) edges.emplace_back(i, i + 1);
  return ProblemSpec{bench_dataset(n, d, 99),
                     LossKind{Loss::kLogistic, 1e-2},
                     build_fusion_matrix(edges, d),
                     PrimalSet::l2_ball(10.0),
                     DualSet::linf_ball(1e-5)};
}

void BM_Matvec(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const Dataset ds = bench_dataset(n, n, 7);
  const Vec v(n, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matvec(ds.features, v));
  }
  state.SetItemsProcessed(state.iterations() * ds.features.nnz());
}
BENCHMARK(BM_Matvec)->Arg(64)->Arg(256)->Arg(1024);

void BM_MatvecTranspose(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const Dataset ds = bench_dataset(n, n, 7);
  const Vec v(n, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matvec_transpose(ds.features, v));
  }
  state.SetItemsProcessed(state.iterations() * ds.features.nnz());
}
BENCHMARK(BM_MatvecTranspose)->Arg(64)->Arg(256)->Arg(1024);

void BM_StochasticGradient(benchmark::State& state) {
  const ProblemSpec spec = bench_instance(1024, state.range(0));
  const Vec x(spec.dim(), 0.1);
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stochastic_gradient(spec, x, rng));
  }
}
BENCHMARK(BM_StochasticGradient)->Arg(32)->Arg(256);

void BM_FullGradient(benchmark::State& state) {
  const ProblemSpec spec = bench_instance(1024, state.range(0));
  const Vec x(spec.dim(), 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(full_gradient(spec, x));
  }
}
BENCHMARK(BM_FullGradient)->Arg(32)->Arg(256);

void BM_DualUpdate(benchmark::State& state) {
  const std::int64_t l = state.range(0);
  const DualSet y_set = DualSet::linf_ball(1e-5);
  Rng rng(5);
  Vec y(l, 0.0), fx(l);
  for (double& e : fx) e = rng.next_gaussian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_update(y, fx, 1.0, y_set));
  }
}
BENCHMARK(BM_DualUpdate)->Arg(64)->Arg(1024);

void BM_ProjectL2Ball(benchmark::State& state) {
  Rng rng(11);
  Vec v(state.range(0));
  for (double& e : v) e = rng.next_gaussian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_l2_ball(v, 1.0));
  }
}
BENCHMARK(BM_ProjectL2Ball)->Arg(64)->Arg(1024);

void BM_SpdhgIterations(benchmark::State& state) {
  const ProblemSpec spec = bench_instance(512, 64);
  for (auto _ : state) {
    SolverConfig cfg;
    cfg.regime = Regime::kStronglyConvexNonUniform;
    cfg.lipschitz = loss_lipschitz_bound(spec);
    cfg.mu = 1e-2;
    cfg.iterations = 1000;
    cfg.checkpoints = {1000};
    cfg.record_wall_time = false;
    benchmark::DoNotOptimize(spdhg_run(spec, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SpdhgIterations)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
