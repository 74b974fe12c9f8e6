#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nbfec/channel.hpp"
#include "nbfec/decoder.hpp"
#include "nbfec/measurement_db.hpp"
#include "nbfec/metrics.hpp"
#include "nbfec/qc_code.hpp"

namespace nbfec {

// Monte Carlo driver for one channel operating point: encode, map,
// transmit, demap, decode, tally. Block b of a point is seeded by
// (seed, point key, b) alone, so results do not depend on worker count or
// on the order points are run in.
struct SimOptions {
  uint64_t seed = 1;
  int workers = 1;
  int max_blocks = 400;
  int target_block_errors = 20;    // stop once both targets are met
  int target_symbol_errors = 100;
  int batch_blocks = 16;           // stop rule applies at batch boundaries
  int max_iters = 15;
  CheckRule rule = CheckRule::exact;
  // Assumed metric variance per real dimension for the soft receiver;
  // NaN means use the true channel sigma2.
  double metric_k = std::numeric_limits<double>::quiet_NaN();
  size_t db_cap_records = 500000;  // rx records kept for metric estimation
  size_t dmc_samples_per_symbol = 50000;  // hard links: W estimation depth
};

struct PointResult {
  double esn0_db = 0.0;
  double sigma2 = 0.0;
  LinkKind kind = LinkKind::awgn;

  long long blocks = 0;
  long long block_errors = 0;
  long long symbol_errors = 0;
  long long bit_errors = 0;
  double post_fec_ser = 0.0;
  double post_fec_ber = 0.0;
  double post_fec_ser_se = 0.0;  // from per-block SER scatter
  double fer = 0.0;
  double avg_iterations = 0.0;

  // receiver-side metrics estimated from this run's recorded samples
  MetricReport metrics;
  double mi_sd_bits = 0.0;  // quadrature oracle at the true sigma2
  double i_hd_bits = std::numeric_limits<double>::quiet_NaN();  // hard links
  size_t db_records = 0;
};

PointResult run_point(const QcCode& code, const Constellation& c,
                      LinkKind kind, double esn0_db, const SimOptions& opts);

// Seeded uniform information word of k_eff field symbols.
std::vector<uint8_t> random_block_info(const QcCode& code, uint64_t seed);

// Same driver over a gamma mix of two ends; per-symbol LLRs use the metric
// of the end that carried the symbol. Metric reports are skipped (the mix
// is not a memoryless point channel with one metric).
struct MixPointResult {
  double gamma = 0.0;
  long long blocks = 0;
  long long block_errors = 0;
  long long symbol_errors = 0;
  double post_fec_ser = 0.0;
  double post_fec_ser_se = 0.0;
  double fer = 0.0;
};

MixPointResult run_mix_point(const QcCode& code, const ChannelMix& mix,
                             double gamma, const SimOptions& opts);

}  // namespace nbfec
