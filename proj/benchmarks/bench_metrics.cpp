#include <benchmark/benchmark.h>

#include "semcom/metrics.hpp"
#include "semcom/rng.hpp"

namespace {

using namespace semcom;

Tensor rand_images(int B, int H, Stream& g) {
  Tensor t({B, 1, H, H});
  for (auto& x : t.v) x = float(g.uniform());
  return t;
}

void BM_Ssim(benchmark::State& state) {
  RandomStreams st(21);
  Stream& g = st.get("x");
  const int B = int(state.range(0)), H = int(state.range(1));
  Tensor a = rand_images(B, H, g);
  Tensor b = rand_images(B, H, g);
  for (auto _ : state) {
    double v = ssim(a, b);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_Ssim)->Args({16, 28})->Args({64, 28});

void BM_SsimWithGrad(benchmark::State& state) {
  RandomStreams st(22);
  Stream& g = st.get("x");
  Tensor a = rand_images(32, 28, g);
  Tensor b = rand_images(32, 28, g);
  Tensor grad;
  for (auto _ : state) {
    double v = ssim(a, b, &grad);
    benchmark::DoNotOptimize(v);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_SsimWithGrad);

void BM_Cce(benchmark::State& state) {
  RandomStreams st(23);
  Stream& g = st.get("x");
  const int B = 256, K = 10;
  Tensor logits({B, K});
  for (auto& x : logits.v) x = float(g.normal());
  std::vector<int> labels(B);
  for (int b = 0; b < B; ++b) labels[b] = b % K;
  Tensor grad;
  for (auto _ : state) {
    double v = cce(logits, labels, &grad);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_Cce);

}  // namespace

BENCHMARK_MAIN();
