// Serial reference vs OpenMP likelihood kernels.
//   bench_kernels --benchmark_filter=gaussian
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <tuple>

#include "palasso/kernels.hpp"
#include "palasso/synth.hpp"

using namespace palasso;

namespace {

const SynthResult& problem(FamilyKind fam, Eigen::Index n, Eigen::Index p, bool second_order) {
  static std::map<std::tuple<int, Eigen::Index, Eigen::Index, bool>, SynthResult> cache;
  auto key = std::make_tuple(static_cast<int>(fam), n, p, second_order);
  auto it = cache.find(key);
  if (it == cache.end()) {
    SynthSpec spec{fam, second_order ? Structure::hierarchical : Structure::independent, n, p, 3, 5, 1};
    it = cache.emplace(key, generate(spec)).first;
  }
  return it->second;
}

template <class Eval>
void run(benchmark::State& state, FamilyKind fam, bool second_order, Eval eval) {
  const Eigen::Index n = state.range(0), p = state.range(1);
  const SynthResult& r = problem(fam, n, p, second_order);
  const Eigen::VectorXd beta = r.true_beta * 0.5;
  const LikelihoodFamily lf{fam, 1.0};
  for (auto _ : state) {
    kernels::Eval e = eval(lf, r.dataset.data, beta, 0.1, true);
    benchmark::DoNotOptimize(e.value);
    benchmark::DoNotOptimize(e.grad.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void args(benchmark::internal::Benchmark* b) {
  b->Args({10000, 100})->Args({100000, 100})->Args({20000, 1000});
}

void args_second_order(benchmark::internal::Benchmark* b) { b->Args({5000, 45}); }

}  // namespace

#define PALASSO_BENCH(name, fam, so, argfn)                                                         \
  void name##_serial(benchmark::State& s) { run(s, fam, so, kernels::serial::evaluate); }          \
  void name##_omp(benchmark::State& s) { run(s, fam, so, kernels::omp::evaluate); }                \
  BENCHMARK(name##_serial)->Apply(argfn)->Unit(benchmark::kMillisecond)->UseRealTime();            \
  BENCHMARK(name##_omp)->Apply(argfn)->Unit(benchmark::kMillisecond)->UseRealTime();

PALASSO_BENCH(gaussian, FamilyKind::gaussian, false, args)
PALASSO_BENCH(bernoulli, FamilyKind::bernoulli_logit, false, args)
PALASSO_BENCH(negbin, FamilyKind::negbin_log, false, args)
PALASSO_BENCH(second_order_gaussian, FamilyKind::gaussian, true, args_second_order)

BENCHMARK_MAIN();
