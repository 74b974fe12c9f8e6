// Hot-path throughput: demapping, decoding, and the I_NB estimate. Run with
// --benchmark_min_time=... to trade precision for wall time.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "nbfec/channel.hpp"
#include "nbfec/constellation.hpp"
#include "nbfec/decoder.hpp"
#include "nbfec/demod.hpp"
#include "nbfec/metrics.hpp"
#include "nbfec/qc_code.hpp"
#include "nbfec/rng.hpp"

using namespace nbfec;

namespace {

struct NoisyBlock {
  QcCode code;
  std::vector<std::complex<double>> rx;
  std::vector<double> llrs;
  double sigma2;
};

// One rate-0.8 block through AWGN near the waterfall, demapped once.
const NoisyBlock& block(int q) {
  static std::vector<std::pair<int, NoisyBlock>> cache;
  for (auto& e : cache)
    if (e.first == q) return e.second;
  NoisyBlock b;
  b.code = build_rate_preset(0.8, q, 1);
  const Constellation c = builtin_constellation("c3");
  b.sigma2 = esn0_db_to_sigma2(9.0);
  Rng rng(7);
  std::vector<uint8_t> info(b.code.k_eff);
  for (auto& s : info) s = (uint8_t)rng.below(8);
  auto cw = encode(b.code, info);
  auto x = map_symbols(cw, c);
  b.rx = awgn_transmit(x, AwgnChannel{b.sigma2, 11});
  b.llrs = symbol_llr_block(b.rx, c, GaussianMetric{b.sigma2});
  cache.emplace_back(q, std::move(b));
  return cache.back().second;
}

void BM_SymbolLlrBlock(benchmark::State& state) {
  const auto& b = block(100);
  const Constellation c = builtin_constellation("c3");
  GaussianMetric q{b.sigma2};
  for (auto _ : state) {
    auto llrs = symbol_llr_block(b.rx, c, q);
    benchmark::DoNotOptimize(llrs.data());
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)b.rx.size());
}
BENCHMARK(BM_SymbolLlrBlock)->Unit(benchmark::kMillisecond);

void BM_DecodeBlock(benchmark::State& state) {
  const auto& b = block((int)state.range(0));
  LayeredDecoder dec(b.code);
  for (auto _ : state) {
    auto r = dec.decode(b.llrs, 15);
    benchmark::DoNotOptimize(r.symbols.data());
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)b.code.n);
}
BENCHMARK(BM_DecodeBlock)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_DecodeBlockMinSum(benchmark::State& state) {
  const auto& b = block(100);
  LayeredDecoder dec(b.code);
  for (auto _ : state) {
    auto r = dec.decode(b.llrs, 15, CheckRule::min_sum);
    benchmark::DoNotOptimize(r.symbols.data());
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)b.code.n);
}
BENCHMARK(BM_DecodeBlockMinSum)->Unit(benchmark::kMillisecond);

void BM_EstimateINb(benchmark::State& state) {
  const Constellation c = builtin_constellation("c3");
  const size_t n = (size_t)state.range(0);
  MeasurementDb db;
  db.constellation_name = c.name;
  db.alphabet = c.size();
  db.esn0_db = 8.0;
  db.tx.resize(n);
  Rng rng(3);
  for (auto& s : db.tx) s = (uint8_t)rng.below(8);
  double s2 = esn0_db_to_sigma2(8.0);
  db.rx = awgn_transmit(map_symbols(db.tx, c), AwgnChannel{s2, 5});
  GaussianMetric q{s2};
  for (auto _ : state) {
    auto r = estimate_i_nb(db, c, q);
    benchmark::DoNotOptimize(r.i_nb_bits);
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)n);
}
BENCHMARK(BM_EstimateINb)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
