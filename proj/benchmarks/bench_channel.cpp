#include <benchmark/benchmark.h>

#include "semcom/channel.hpp"
#include "semcom/rng.hpp"

namespace {

using namespace semcom;

LatentSignal make_signal(int B, int d, Stream& g) {
  LatentSignal z = LatentSignal::zeros(B, d);
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < d; ++k) {
      z.i(b, k) = float(g.normal());
      z.q(b, k) = float(g.normal());
    }
  return z;
}

void BM_PowerNormalize(benchmark::State& state) {
  RandomStreams st(1);
  Stream& g = st.get("x");
  const int B = int(state.range(0)), d = int(state.range(1));
  LatentSignal z = make_signal(B, d, g);
  for (auto _ : state) {
    LatentSignal y = power_normalize(z);
    benchmark::DoNotOptimize(y.i.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_PowerNormalize)->Args({64, 64})->Args({64, 256})->Args({256, 256});

void BM_Transmit(benchmark::State& state) {
  RandomStreams st(2);
  Stream& g = st.get("x");
  Stream& fad = st.get("fading");
  Stream& noi = st.get("noise");
  const int B = int(state.range(0)), d = int(state.range(1));
  LatentSignal x = power_normalize(make_signal(B, d, g));
  ChannelRealization ch = sample_fading(B, 10.0, fad);
  for (auto _ : state) {
    LatentSignal y = transmit(x, ch, noi);
    benchmark::DoNotOptimize(y.i.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_Transmit)->Args({64, 64})->Args({64, 256})->Args({256, 256});

void BM_TransmitSuperposed(benchmark::State& state) {
  RandomStreams st(3);
  Stream& g = st.get("x");
  Stream& fad = st.get("fading");
  Stream& noi = st.get("noise");
  const int B = int(state.range(0)), d = int(state.range(1));
  LatentSignal x = power_normalize(make_signal(B, d, g));
  LatentSignal delta = make_signal(B, d, g);
  ChannelRealization cs = sample_fading(B, 10.0, fad);
  ChannelRealization cj = sample_fading(B, 10.0, fad);
  for (auto _ : state) {
    LatentSignal y = transmit_superposed(x, delta, cs, cj, noi);
    benchmark::DoNotOptimize(y.i.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_TransmitSuperposed)->Args({64, 64})->Args({256, 256});

}  // namespace
