#include "nbfec/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "nbfec/demod.hpp"
#include "nbfec/errors.hpp"
#include "nbfec/parallel.hpp"
#include "nbfec/rng.hpp"

namespace nbfec {
namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

struct BlockStats {
  long long sym_err = 0;
  long long bit_err = 0;
  int iterations = 0;
  bool failed = false;
};

struct Tally {
  long long blocks = 0;
  long long block_errors = 0;
  long long symbol_errors = 0;
  long long bit_errors = 0;
  double sum_iters = 0.0;
  double sum_ser = 0.0;
  double sum_ser2 = 0.0;
};

// Batched Monte Carlo loop. The stop rule only fires at batch boundaries
// and every block is seeded by its own index, so the set of simulated
// blocks is identical for any worker count.
void run_batches(const SimOptions& opts, size_t block_len,
                 const std::function<BlockStats(size_t)>& block_fn, Tally& t) {
  if (opts.max_blocks < 1) throw ConfigError("sim: max_blocks must be >= 1");
  if (opts.batch_blocks < 1) throw ConfigError("sim: batch_blocks must be >= 1");
  for (;;) {
    size_t begin = static_cast<size_t>(t.blocks);
    size_t end = std::min<size_t>(begin + opts.batch_blocks,
                                  static_cast<size_t>(opts.max_blocks));
    std::vector<BlockStats> outs(end - begin);
    parallel_for(end - begin, opts.workers,
                 [&](size_t i) { outs[i] = block_fn(begin + i); });
    for (const BlockStats& bs : outs) {
      ++t.blocks;
      t.symbol_errors += bs.sym_err;
      t.bit_errors += bs.bit_err;
      if (bs.failed) ++t.block_errors;
      t.sum_iters += bs.iterations;
      double ser = static_cast<double>(bs.sym_err) / block_len;
      t.sum_ser += ser;
      t.sum_ser2 += ser * ser;
    }
    if (t.blocks >= opts.max_blocks) break;
    if (t.block_errors >= opts.target_block_errors &&
        t.symbol_errors >= opts.target_symbol_errors) {
      break;
    }
  }
}

void fill_rates(const Tally& t, size_t block_len, double& ser, double& ber,
                double& se, double& fer, double& avg_iters) {
  double b = static_cast<double>(t.blocks);
  ser = static_cast<double>(t.symbol_errors) / (b * block_len);
  fer = static_cast<double>(t.block_errors) / b;
  avg_iters = t.sum_iters / b;
  double mean = t.sum_ser / b;
  double var = std::max(0.0, t.sum_ser2 / b - mean * mean);
  se = t.blocks > 1 ? std::sqrt(var / b) : 0.0;
  ber = static_cast<double>(t.bit_errors) / (b * block_len);
}

BlockStats compare_block(const QcCode& code, const std::vector<uint8_t>& cw,
                         const DecodeResult& dr) {
  BlockStats bs;
  bs.iterations = dr.iterations;
  for (size_t i = 0; i < code.n; ++i) {
    if (dr.symbols[i] != cw[i]) {
      ++bs.sym_err;
      bs.bit_err += std::popcount(
          static_cast<unsigned>(dr.symbols[i] ^ cw[i]));
    }
  }
  bs.failed = bs.sym_err > 0;
  return bs;
}

}  // namespace

std::vector<uint8_t> random_block_info(const QcCode& code, uint64_t seed) {
  Rng rng(seed);
  std::vector<uint8_t> info(code.k_eff);
  for (auto& s : info) s = static_cast<uint8_t>(rng.below(code.gf.size()));
  return info;
}

PointResult run_point(const QcCode& code, const Constellation& c,
                      LinkKind kind, double esn0_db, const SimOptions& opts) {
  if (c.size() != code.gf.size()) {
    throw ConfigError("run_point: constellation order must match the code field");
  }
  PointResult res;
  res.esn0_db = esn0_db;
  res.sigma2 = esn0_db_to_sigma2(esn0_db);
  res.kind = kind;

  uint64_t key = mix64(std::bit_cast<uint64_t>(esn0_db)) ^ fnv1a64(c.name) ^
                 fnv1a64(code.id) ^ (kind == LinkKind::awgn ? 0 : 0x5afe);
  uint64_t point_seed = derive_seed(opts.seed, key);

  DecodingMetric metric;
  if (kind == LinkKind::awgn) {
    double k = std::isnan(opts.metric_k) ? res.sigma2 : opts.metric_k;
    metric = GaussianMetric{k};
  } else {
    DmcMatrix w = estimate_dmc(c, res.sigma2, opts.dmc_samples_per_symbol,
                               derive_seed(point_seed, 0xdc));
    res.i_hd_bits = mi_hd(w, c.priors);
    metric = DmcMetric{std::move(w)};
  }

  size_t db_keep = std::max<size_t>(1, opts.db_cap_records / code.n);
  std::vector<std::vector<uint8_t>> db_tx(db_keep);
  std::vector<std::vector<std::complex<double>>> db_rx(db_keep);

  Tally tally;
  run_batches(opts, code.n, [&](size_t b) {
    std::vector<uint8_t> cw =
        encode(code, random_block_info(code, derive_seed(point_seed, 2 * b)));
    std::vector<std::complex<double>> x = map_symbols(cw, c);
    std::vector<std::complex<double>> y = awgn_transmit(
        x, AwgnChannel{res.sigma2, derive_seed(point_seed, 2 * b + 1)});
    std::vector<double> llrs = symbol_llr_block(y, c, metric);
    LayeredDecoder dec(code);
    DecodeResult dr = dec.decode(llrs, opts.max_iters, opts.rule);
    if (b < db_keep) {
      db_tx[b] = std::move(cw);
      db_rx[b] = std::move(y);
      return compare_block(code, db_tx[b], dr);
    }
    return compare_block(code, cw, dr);
  }, tally);

  res.blocks = tally.blocks;
  res.block_errors = tally.block_errors;
  res.symbol_errors = tally.symbol_errors;
  res.bit_errors = tally.bit_errors;
  fill_rates(tally, code.n, res.post_fec_ser, res.post_fec_ber,
             res.post_fec_ser_se, res.fer, res.avg_iterations);

  MeasurementDb db;
  db.constellation_name = c.name;
  db.alphabet = c.size();
  db.esn0_db = esn0_db;
  size_t kept = std::min<size_t>(db_keep, static_cast<size_t>(tally.blocks));
  db.tx.reserve(kept * code.n);
  db.rx.reserve(kept * code.n);
  for (size_t b = 0; b < kept; ++b) {
    db.tx.insert(db.tx.end(), db_tx[b].begin(), db_tx[b].end());
    db.rx.insert(db.rx.end(), db_rx[b].begin(), db_rx[b].end());
  }
  res.db_records = db.size();

  INbOptions mopts;
  mopts.workers = opts.workers;
  res.metrics = analyze(db, c, metric, mopts);
  res.mi_sd_bits = mi_sd_numeric(c, res.sigma2);
  return res;
}

MixPointResult run_mix_point(const QcCode& code, const ChannelMix& mix,
                             double gamma, const SimOptions& opts) {
  const Constellation* c1 = mix.ch1.constellation;
  const Constellation* c2 = mix.ch2.constellation;
  if (!c1 || !c2) throw ConfigError("run_mix_point: both ends need a constellation");
  if (c1->size() != code.gf.size() || c2->size() != code.gf.size()) {
    throw ConfigError("run_mix_point: constellation order must match the code field");
  }

  ChannelMix m = mix;
  m.gamma = gamma;

  // gamma 0 / 1 IS one of the component channels; route those through
  // run_point so the degenerate sweep entries reproduce the standalone
  // single-channel results bit for bit.
  if (gamma == 0.0 || gamma == 1.0) {
    const MixEnd& end = gamma == 1.0 ? m.ch1 : m.ch2;
    PointResult p = run_point(code, *end.constellation, end.kind,
                              sigma2_to_esn0_db(end.sigma2), opts);
    MixPointResult res;
    res.gamma = gamma;
    res.blocks = p.blocks;
    res.block_errors = p.block_errors;
    res.symbol_errors = p.symbol_errors;
    res.post_fec_ser = p.post_fec_ser;
    res.post_fec_ser_se = p.post_fec_ser_se;
    res.fer = p.fer;
    return res;
  }

  const size_t boundary = mix_boundary(code.n, gamma);
  const size_t M = code.gf.size();

  uint64_t key = mix64(std::bit_cast<uint64_t>(m.ch1.sigma2)) ^
                 mix64(std::bit_cast<uint64_t>(m.ch2.sigma2)) ^
                 fnv1a64(c1->name) ^ fnv1a64(c2->name) ^ fnv1a64(code.id);
  uint64_t point_seed = derive_seed(opts.seed, key);

  auto end_metric = [&](const MixEnd& end, uint64_t tag) -> DecodingMetric {
    if (end.kind == LinkKind::awgn) {
      double k = std::isnan(opts.metric_k) ? end.sigma2 : opts.metric_k;
      return GaussianMetric{k};
    }
    return DmcMetric{estimate_dmc(*end.constellation, end.sigma2,
                                  opts.dmc_samples_per_symbol,
                                  derive_seed(point_seed, tag))};
  };
  DecodingMetric q1 = end_metric(m.ch1, 0xdc1);
  DecodingMetric q2 = end_metric(m.ch2, 0xdc2);

  Tally tally;
  run_batches(opts, code.n, [&](size_t b) {
    std::vector<uint8_t> cw =
        encode(code, random_block_info(code, derive_seed(point_seed, 2 * b)));
    std::vector<std::complex<double>> y =
        mix_transmit(cw, m, derive_seed(point_seed, 2 * b + 1));
    std::vector<double> llrs(code.n * (M - 1));
    for (size_t i = 0; i < code.n; ++i) {
      bool first = i < boundary;
      symbol_llrs(y[i], first ? *c1 : *c2, first ? q1 : q2,
                  &llrs[i * (M - 1)]);
    }
    LayeredDecoder dec(code);
    DecodeResult dr = dec.decode(llrs, opts.max_iters, opts.rule);
    return compare_block(code, cw, dr);
  }, tally);

  MixPointResult res;
  res.gamma = gamma;
  res.blocks = tally.blocks;
  res.block_errors = tally.block_errors;
  res.symbol_errors = tally.symbol_errors;
  double ber_unused, avg_iters_unused;
  fill_rates(tally, code.n, res.post_fec_ser, ber_unused, res.post_fec_ser_se,
             res.fer, avg_iters_unused);
  return res;
}

}  // namespace nbfec
