#include <benchmark/benchmark.h>

#include <algorithm>

#include "semcom/nn.hpp"
#include "semcom/rng.hpp"

namespace {

using namespace semcom;

Tensor randn_tensor(std::vector<int> shape, Stream& g) {
  Tensor t(std::move(shape));
  for (auto& x : t.v) x = float(g.normal());
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  RandomStreams st(11);
  Stream& init = st.get("init");
  const int B = int(state.range(0)), C = int(state.range(1)), H = int(state.range(2));
  Conv2d conv(C, C, init, "bench.conv");
  Tensor x = randn_tensor({B, C, H, H}, st.get("x"));
  for (auto _ : state) {
    Tensor y = conv.forward(x, false);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_Conv2dForward)->Args({32, 16, 14})->Args({32, 32, 14})->Args({32, 32, 28});

void BM_Conv2dTrainStep(benchmark::State& state) {
  RandomStreams st(12);
  Stream& init = st.get("init");
  const int B = 32, C = 32, H = 14;
  Conv2d conv(C, C, init, "bench.conv");
  std::vector<Param*> ps;
  conv.collect(ps);
  Tensor x = randn_tensor({B, C, H, H}, st.get("x"));
  for (auto _ : state) {
    Tensor y = conv.forward(x, true);
    for (auto* p : ps) std::fill(p->g.v.begin(), p->g.v.end(), 0.f);
    Tensor gx = conv.backward(y);
    benchmark::DoNotOptimize(gx.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_Conv2dTrainStep);

void BM_ConvTranspose2dForward(benchmark::State& state) {
  RandomStreams st(13);
  Stream& init = st.get("init");
  const int B = 32, C = 32, H = 7;
  ConvTranspose2d up(C, C, init, "bench.convT");
  Tensor x = randn_tensor({B, C, H, H}, st.get("x"));
  for (auto _ : state) {
    Tensor y = up.forward(x, false);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_ConvTranspose2dForward);

void BM_DenseForward(benchmark::State& state) {
  RandomStreams st(14);
  Stream& init = st.get("init");
  const int B = int(state.range(0)), D = int(state.range(1));
  Dense fc(D, D, init, "bench.fc");
  Tensor x = randn_tensor({B, D}, st.get("x"));
  for (auto _ : state) {
    Tensor y = fc.forward(x, false);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_DenseForward)->Args({64, 256})->Args({64, 512});

}  // namespace
