#include <benchmark/benchmark.h>

#include "freqdim/measures.hpp"
#include "freqdim/mixing.hpp"
#include "freqdim/nonconv.hpp"
#include "freqdim/observables.hpp"
#include "freqdim/rng.hpp"
#include "freqdim/schedules.hpp"

namespace {

using namespace freqdim;

measures::Law coin() {
  return measures::BernoulliLaw::from_weights({Rational(1, 2), Rational(1, 2)});
}

schedules::Schedule three_term() {
  schedules::Schedule s;
  s.q.push_back(schedules::ScheduleFn::poly({0, 1}));
  s.q.push_back(schedules::ScheduleFn::poly({0, 2}));
  s.q.push_back(schedules::ScheduleFn::poly({0, 2, 1}));
  return s;
}

void BM_StreamAccess(benchmark::State& state) {
  const auto stream = measures::sample_stream(coin(), RngKey{7, 0});
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.at(i));
    i = (i + 2654435761ull) & ((1ull << 40) - 1);
  }
}
BENCHMARK(BM_StreamAccess);

void BM_SllnEngine(benchmark::State& state) {
  const auto mu = coin();
  const auto sched = three_term();
  const auto F = observables::Observable::indicator_product(digits::Alphabet::base(2),
                                                            {0, 0, 0});
  const auto stream = measures::sample_stream(mu, RngKey{7, 0});
  const std::uint64_t N = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nonconv::run_slln(stream, sched, F, mu, N, {N}));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(N));
}
BENCHMARK(BM_SllnEngine)->Arg(1 << 12)->Arg(1 << 16);

void BM_MatrixPower(benchmark::State& state) {
  const auto chain = measures::FiniteMarkovChain::from_transition(
      {{Rational(3, 4), Rational(1, 4)}, {Rational(1, 4), Rational(3, 4)}});
  const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixing::mat_pow(chain.P, n));
  }
}
BENCHMARK(BM_MatrixPower)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
