#include "doctest.h"

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "nbfec/channel.hpp"
#include "nbfec/constellation.hpp"
#include "nbfec/errors.hpp"
#include "nbfec/metrics.hpp"
#include "nbfec/rng.hpp"
#include "test_util.hpp"

using namespace nbfec;
using testutil::make_awgn_db;

TEST_CASE("golden section finds analytic maxima") {
  auto quad = [](double x) { return -(x - 2.0) * (x - 2.0); };
  GoldenResult r = golden_section_max(quad, 0.0, 10.0, 1e-6);
  CHECK(std::abs(r.argmax - 2.0) <= 1e-6);
  CHECK(r.max == doctest::Approx(0.0));

  auto line = [](double x) { return x; };
  r = golden_section_max(line, 0.0, 1.0, 1e-6);
  CHECK(std::abs(r.argmax - 1.0) <= 1e-6);

  auto wave = [](double x) { return std::sin(x); };
  r = golden_section_max(wave, 0.0, M_PI, 1e-8);
  CHECK(std::abs(r.argmax - M_PI / 2) <= 1e-7);
  CHECK(r.max == doctest::Approx(1.0));

  CHECK_THROWS_AS(golden_section_max(line, 1.0, 1.0, 1e-6), InputError);
  CHECK_THROWS_AS(golden_section_max(line, 2.0, 1.0, 1e-6), InputError);
}

TEST_CASE("symbol MI limits and the frozen Monte Carlo oracle") {
  Constellation c = builtin_constellation("c3");
  CHECK(mi_sd_numeric(c, 1e3) <= 1e-3);
  CHECK(mi_sd_numeric(c, 1e-6) == doctest::Approx(3.0).epsilon(1e-3));

  // 8-PSK at Es/N0 = 10 dB: 2.677017 +- 0.00026 from an independent
  // 10^7-sample Monte Carlo run of the same integral
  double mi = mi_sd_numeric(c, esn0_db_to_sigma2(10.0));
  CHECK(std::abs(mi - 2.677017) <= 0.005);

  // quadrature-order doubling has converged
  CHECK(std::abs(mi_sd_numeric(c, 0.05, 1e-6) - mi) < 2e-4);
}

TEST_CASE("MI is monotone in SNR and bounded by m") {
  Constellation c = builtin_constellation("c2");
  double last = 0.0;
  for (double e = -2.0; e <= 14.0; e += 2.0) {
    double mi = mi_sd_numeric(c, esn0_db_to_sigma2(e));
    CHECK(mi >= last - 1e-9);
    CHECK(mi <= 3.0 + 1e-9);
    last = mi;
  }
}

TEST_CASE("near-noiseless recordings saturate the estimator") {
  Constellation c = builtin_constellation("c3");
  MeasurementDb db = make_awgn_db(c, 40.0, 100000, 101);
  INbResult r = estimate_i_nb(db, c, GaussianMetric{0.5});
  CHECK(std::abs(r.i_nb_bits - 3.0) <= 0.01);
}

TEST_CASE("matched metric peaks at nu = 1") {
  Constellation c = builtin_constellation("c3");
  double sigma2 = esn0_db_to_sigma2(8.0);
  MeasurementDb db = make_awgn_db(c, 8.0, 100000, 102);
  INbResult r = estimate_i_nb(db, c, GaussianMetric{sigma2});
  CHECK(std::abs(r.nu_hat - 1.0) <= 0.05);
  CHECK(std::abs(r.sigma2_hat - sigma2) / sigma2 <= 0.05);
}

TEST_CASE("variance scaling is absorbed by the tilt") {
  Constellation c = builtin_constellation("c3");
  double sigma2 = esn0_db_to_sigma2(8.0);
  MeasurementDb db = make_awgn_db(c, 8.0, 100000, 103);
  INbResult matched = estimate_i_nb(db, c, GaussianMetric{sigma2});
  INbResult twice = estimate_i_nb(db, c, GaussianMetric{2 * sigma2});
  INbResult half = estimate_i_nb(db, c, GaussianMetric{0.5});

  CHECK(std::abs(twice.sigma2_hat - sigma2) / sigma2 <= 0.05);
  CHECK(std::abs(twice.i_nb_bits - matched.i_nb_bits) <= 0.005);
  CHECK(std::abs(half.i_nb_bits - matched.i_nb_bits) <= 0.005);
  // K and 4K land on the same supremum to optimizer precision
  INbResult k4 = estimate_i_nb(db, c, GaussianMetric{2.0});
  CHECK(std::abs(half.i_nb_bits - k4.i_nb_bits) <= 2e-6);
}

TEST_CASE("estimator warnings on thin or degenerate input") {
  Constellation c = builtin_constellation("c3");
  MeasurementDb small = make_awgn_db(c, 8.0, 200, 104);
  INbResult r = estimate_i_nb(small, c, GaussianMetric{0.5});
  CHECK(!r.warnings.empty());

  MeasurementDb degenerate = small;
  for (auto& y : degenerate.rx) y = {0.25, 0.25};
  INbResult d = estimate_i_nb(degenerate, c, GaussianMetric{0.5});
  CHECK(std::isfinite(d.i_nb_bits));
  CHECK(!d.warnings.empty());
}

TEST_CASE("the auxiliary-channel bound sits under the tilted estimate") {
  Constellation c = builtin_constellation("c3");
  double sigma2 = esn0_db_to_sigma2(8.0);
  MeasurementDb db = make_awgn_db(c, 8.0, 200000, 105);

  // matched: nu = 1 is already optimal
  INbResult matched = estimate_i_nb(db, c, GaussianMetric{sigma2});
  double a_matched = aclb(db, c, GaussianMetric{sigma2});
  CHECK(a_matched <= matched.i_nb_bits + 1e-12);
  CHECK(std::abs(a_matched - matched.i_nb_bits) <= 1e-4);

  // strongly mismatched: the fixed nu = 1 bound visibly underestimates
  INbResult mm = estimate_i_nb(db, c, GaussianMetric{4 * sigma2});
  double a_mm = aclb(db, c, GaussianMetric{4 * sigma2});
  CHECK(a_mm <= mm.i_nb_bits + 1e-12);
  CHECK(mm.i_nb_bits - a_mm > 0.01);
  // the sup rescues the full estimate
  CHECK(std::abs(mm.i_nb_bits - matched.i_nb_bits) <= 0.005);

  // garbage metric: bound collapses toward zero
  double a_flat = aclb(db, c, GaussianMetric{1e9});
  CHECK(std::abs(a_flat) <= 1e-3);

  // the sample estimate stays below the channel MI (3 sigma)
  double mi = mi_sd_numeric(c, sigma2);
  CHECK(matched.i_nb_bits <= mi + 3 * matched.stderr_bits);
}

TEST_CASE("bit-wise rates never beat symbol-wise rates") {
  Constellation c = builtin_constellation("c3");
  MeasurementDb db = make_awgn_db(c, 8.0, 100000, 106);
  double g = gmi(db, c, GaussianMetric{0.5});
  INbResult r = estimate_i_nb(db, c, GaussianMetric{0.5});
  CHECK(g < r.i_nb_bits);  // binary-reflected 8-PSK labels lose rate

  // near-noiseless with a matched metric the label structure stops mattering
  MeasurementDb clean = make_awgn_db(c, 40.0, 50000, 107);
  GaussianMetric matched{esn0_db_to_sigma2(40.0)};
  CHECK(gmi(clean, c, matched) == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("Gray QPSK factorizes into independent bit channels") {
  // needs the true posterior, so the metric must be matched
  Constellation c = builtin_constellation("qpsk");
  double sigma2 = esn0_db_to_sigma2(6.0);
  MeasurementDb db = make_awgn_db(c, 6.0, 200000, 108);
  double g = gmi(db, c, GaussianMetric{sigma2});
  INbResult r = estimate_i_nb(db, c, GaussianMetric{sigma2});
  CHECK(std::abs(g - r.i_nb_bits) <= 0.01);
}

TEST_CASE("pre-FEC rates") {
  Constellation c = builtin_constellation("c3");
  MeasurementDb clean = make_awgn_db(c, 60.0, 5000, 109);
  PreFecRates r = pre_fec_rates(clean, c);
  CHECK(r.ber == 0.0);
  CHECK(r.ser == 0.0);

  // synthetic worst case: every record is received as the point whose
  // label flips exactly the top bit out of three
  MeasurementDb flipped = clean;
  for (size_t i = 0; i < flipped.size(); ++i)
    flipped.rx[i] = c.points[flipped.tx[i] ^ 4];
  r = pre_fec_rates(flipped, c);
  CHECK(r.ser == doctest::Approx(1.0));
  CHECK(r.ber == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  MeasurementDb noisy = make_awgn_db(c, 6.0, 50000, 110);
  r = pre_fec_rates(noisy, c);
  CHECK(r.ber > 0.0);
  CHECK(r.ber <= r.ser);
  CHECK(r.ser <= 1.0);
}

TEST_CASE("hard-decision MI closed forms") {
  // identity channel: full log2(M) bits
  DmcMatrix ident(8);
  for (size_t k = 0; k < 8; ++k) ident.at(k, k) = 1.0;
  std::vector<double> pri8(8, 0.125);
  CHECK(mi_hd(ident, pri8) == doctest::Approx(3.0).epsilon(1e-12));

  DmcMatrix uni(8);
  for (auto& v : uni.p) v = 0.125;
  CHECK(mi_hd(uni, pri8) == doctest::Approx(0.0).epsilon(1e-12));

  // binary symmetric channel against 1 - h2(p)
  for (double p : {0.01, 0.05, 0.11, 0.25, 0.45}) {
    DmcMatrix bsc(2);
    bsc.at(0, 0) = 1 - p;
    bsc.at(1, 0) = p;
    bsc.at(0, 1) = p;
    bsc.at(1, 1) = 1 - p;
    std::vector<double> pri2(2, 0.5);
    double h2 = -p * std::log2(p) - (1 - p) * std::log2(1 - p);
    CHECK(std::abs(mi_hd(bsc, pri2) - (1.0 - h2)) <= 1e-6);
  }

  DmcMatrix bad(2);
  bad.at(0, 0) = 0.9;  // column sums 0.9 and 0: not a channel
  std::vector<double> pri2(2, 0.5);
  CHECK_THROWS_AS(mi_hd(bad, pri2), InputError);
}

TEST_CASE("hard decisions cannot add information") {
  Constellation c = builtin_constellation("c3");
  double sigma2 = esn0_db_to_sigma2(8.0);
  DmcMatrix w = estimate_dmc(c, sigma2, 100000, 111);
  CHECK(mi_hd(w, c.priors) <= mi_sd_numeric(c, sigma2) + 3e-3);
}

TEST_CASE("the combined report matches the individual metrics") {
  Constellation c = builtin_constellation("c2");
  MeasurementDb db = make_awgn_db(c, 9.0, 50000, 112);
  DecodingMetric q = GaussianMetric{0.5};
  MetricReport rep = analyze(db, c, q);
  INbResult r = estimate_i_nb(db, c, q);
  PreFecRates pf = pre_fec_rates(db, c);
  CHECK(rep.i_nb_bits == r.i_nb_bits);
  CHECK(rep.nu_hat == r.nu_hat);
  CHECK(rep.sigma2_hat == r.sigma2_hat);
  CHECK(rep.aclb_bits == aclb(db, c, q));
  CHECK(rep.gmi_bits == gmi(db, c, q));
  CHECK(rep.pre_fec_ber == pf.ber);
  CHECK(rep.pre_fec_ser == pf.ser);
  CHECK(rep.n_records == db.size());
  CHECK(rep.aclb_bits <= rep.i_nb_bits + 1e-12);
}

TEST_CASE("reductions do not depend on the worker count") {
  Constellation c = builtin_constellation("c3");
  MeasurementDb db = make_awgn_db(c, 8.0, 60000, 113);
  INbOptions one;
  one.workers = 1;
  INbOptions four;
  four.workers = 4;
  INbResult a = estimate_i_nb(db, c, GaussianMetric{0.5}, one);
  INbResult b = estimate_i_nb(db, c, GaussianMetric{0.5}, four);
  CHECK(a.i_nb_bits == b.i_nb_bits);
  CHECK(a.nu_hat == b.nu_hat);
  CHECK(gmi(db, c, GaussianMetric{0.5}, 1) == gmi(db, c, GaussianMetric{0.5}, 3));
}
