#include <benchmark/benchmark.h>

#include "pslab/analysis.hpp"
#include "pslab/channel.hpp"
#include "pslab/phase_recovery.hpp"

using namespace pslab;

namespace {

std::vector<Complex> received_fixture(const Constellation& cons, std::size_t count,
                                      double snr_db) {
  const Rng rng(7);
  const auto symbols = cons.sample(count, rng.stream(0));
  return transmit(symbols, wiener_trajectory(count, 200e3, 50e9, rng.stream(1)), cons,
                  ChannelParams{snr_db}, rng.stream(2));
}

void BM_SampleSymbols(benchmark::State& state) {
  const auto cons = Constellation::square_qam(64).shaped(0.03);
  const Rng rng(1);
  for (auto _ : state) {
    auto symbols = cons.sample(static_cast<std::size_t>(state.range(0)), rng);
    benchmark::DoNotOptimize(symbols);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleSymbols)->Arg(4096)->Arg(65536);

void BM_Transmit(benchmark::State& state) {
  const auto cons = Constellation::square_qam(64);
  const Rng rng(2);
  const auto symbols = cons.sample(static_cast<std::size_t>(state.range(0)), rng.stream(0));
  const auto traj = wiener_trajectory(symbols.size(), 200e3, 50e9, rng.stream(1));
  for (auto _ : state) {
    auto out = transmit(symbols, traj, cons, ChannelParams{17.0}, rng.stream(2));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Transmit)->Arg(65536);

void BM_DecideFast(benchmark::State& state) {
  const auto cons = Constellation::square_qam(static_cast<int>(state.range(0)));
  Rng rng(3);
  std::vector<Complex> points(4096);
  for (auto& p : points)
    p = {(rng.uniform() - 0.5) * 20.0, (rng.uniform() - 0.5) * 20.0};
  for (auto _ : state)
    for (const Complex& p : points) benchmark::DoNotOptimize(decide_fast(p, cons));
  state.SetItemsProcessed(state.iterations() * points.size());
}
BENCHMARK(BM_DecideFast)->Arg(64)->Arg(256);

void BM_BlockBps(benchmark::State& state) {
  const auto cons = Constellation::square_qam(64);
  const auto received = received_fixture(cons, 65536, 14.0);
  RecoveryConfig rc;
  rc.mode = Mode::bps;
  rc.window = static_cast<int>(state.range(0));
  rc.test_phases = 900;
  rc.sector_offset = kPi / 4;
  for (auto _ : state) {
    auto rec = run_recovery(received, {}, cons, rc);
    benchmark::DoNotOptimize(rec);
  }
  state.SetItemsProcessed(state.iterations() * received.size());
}
BENCHMARK(BM_BlockBps)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SlidingBps(benchmark::State& state) {
  const auto cons = Constellation::square_qam(64);
  const auto received = received_fixture(cons, 65536, 14.0);
  RecoveryConfig rc;
  rc.mode = Mode::bps;
  rc.window = static_cast<int>(state.range(0));
  rc.test_phases = 60;
  rc.windowing = Windowing::sliding_centered;
  for (auto _ : state) {
    auto rec = run_recovery(received, {}, cons, rc);
    benchmark::DoNotOptimize(rec);
  }
  state.SetItemsProcessed(state.iterations() * received.size());
}
BENCHMARK(BM_SlidingBps)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_MiAwgn(benchmark::State& state) {
  const auto cons =
      Constellation::square_qam(static_cast<int>(state.range(0))).shaped(0.01);
  const double snr = db_to_linear(20.0);
  for (auto _ : state) benchmark::DoNotOptimize(mi_awgn(cons, snr));
  state.SetLabel("order 24 per axis");
}
BENCHMARK(BM_MiAwgn)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
