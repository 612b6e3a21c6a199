#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gef/metrics.hpp"
#include "gef/nn/layers.hpp"
#include "gef/tensor.hpp"

using namespace gef;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b).values().data());
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const Tensor a = random_tensor({n, n}, rng, true), b = random_tensor({n, n}, rng, true);
  for (auto _ : state) {
    Tape tape;
    tape.backward(sum(matmul(a, b)));
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(32)->Arg(64);

void BM_LstmStep(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const nn::LstmCell cell(100, 256, rng);
  std::mt19937_64 r(4);
  const Tensor x = random_tensor({batch, 100}, r);
  const nn::LstmState s0{Tensor::zeros({batch, 256}), Tensor::zeros({batch, 256})};
  for (auto _ : state) {
    NoGradGuard no_grad;
    benchmark::DoNotOptimize(cell.step(x, s0).h.values().data());
  }
}
BENCHMARK(BM_LstmStep)->Arg(1)->Arg(64);

void BM_CorpusBleu(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> tok(0, 200), len(5, 40);
  std::vector<std::vector<int>> cand(n), ref(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand[i].resize(static_cast<std::size_t>(len(rng)));
    ref[i].resize(static_cast<std::size_t>(len(rng)));
    for (auto& t : cand[i]) t = tok(rng);
    for (auto& t : ref[i]) t = tok(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::bleu<int>(cand, ref).bleu[3]);
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
