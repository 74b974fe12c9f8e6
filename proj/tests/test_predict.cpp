#include "doctest.h"

#include <cmath>
#include <vector>

#include "nbfec/channel.hpp"
#include "nbfec/constellation.hpp"
#include "nbfec/errors.hpp"
#include "nbfec/predict.hpp"
#include "test_util.hpp"

using namespace nbfec;
using testutil::make_awgn_db;

namespace {

CalibrationCurve synthetic_curve() {
  // SER(MI) = 10^{-10 (MI - 2)}
  CalibrationCurve curve;
  curve.code_id = "synthetic";
  curve.target_ser = 1e-4;
  curve.seed = 1;
  for (double mi = 2.0; mi <= 2.601; mi += 0.1) {
    CalibrationPoint p;
    p.constellation = "c3";
    p.mi_bits = mi;
    p.post_fec_ser = std::pow(10.0, -10.0 * (mi - 2.0));
    p.blocks = 100;
    p.block_len = 5000;
    curve.points.push_back(p);
  }
  return curve;
}

}  // namespace

TEST_CASE("crossings interpolate linearly in log SER") {
  std::vector<CrossSample> s;
  for (double mi = 2.0; mi <= 2.601; mi += 0.1)
    s.push_back({mi, std::pow(10.0, -10.0 * (mi - 2.0)), 1e-12});
  CHECK(crossing_at(s, 1e-4) == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(crossing_at(s, 1e-3) == doctest::Approx(2.3).epsilon(1e-12));

  // increasing-error axis (pre-FEC style) works the same
  std::vector<CrossSample> r;
  for (double x = 0.0; x <= 0.601; x += 0.1)
    r.push_back({x, std::pow(10.0, -10.0 * (0.6 - x)), 1e-12});
  CHECK(crossing_at(r, 1e-4) == doctest::Approx(0.2).epsilon(1e-10));

  // zero-error points fall back to their floor
  std::vector<CrossSample> f{{2.5, 1e-2, 1e-6}, {2.6, 0.0, 1e-5}};
  CHECK(crossing_at(f, 1e-3) == doctest::Approx(2.5 + 0.1 / 3.0));

  std::vector<CrossSample> high{{2.0, 0.5, 1e-6}, {2.1, 0.2, 1e-6}};
  CHECK_THROWS_AS(crossing_at(high, 1e-4), ConfigError);
}

TEST_CASE("prediction follows the log-linear rule") {
  CalibrationCurve curve;
  curve.code_id = "toy";
  CalibrationPoint a;
  a.mi_bits = 2.5;
  a.post_fec_ser = 1e-2;
  CalibrationPoint b;
  b.mi_bits = 2.6;
  b.post_fec_ser = 1e-4;
  curve.points = {a, b};

  Prediction mid = predict_post_fec(2.55, curve);
  CHECK(mid.post_fec_ser == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(!mid.extrapolated);
  CHECK(mid.mi_lo == 2.5);
  CHECK(mid.mi_hi == 2.6);

  CHECK(predict_post_fec(2.5, curve).post_fec_ser == doctest::Approx(1e-2));
  CHECK(predict_post_fec(2.6, curve).post_fec_ser == doctest::Approx(1e-4));

  Prediction out = predict_post_fec(2.7, curve);
  CHECK(out.extrapolated);
  CHECK(out.post_fec_ser < 1e-4);

  CalibrationCurve empty;
  CHECK_THROWS_AS(predict_post_fec(2.5, empty), InputError);
}

TEST_CASE("threshold extrapolation refits the waterfall line") {
  CalibrationCurve curve = synthetic_curve();
  // exact law: crossing 1e-4 at 2.4; refit from the sub-0.1 points only
  CHECK(extrapolate_threshold(curve, 1e-4) == doctest::Approx(2.4).epsilon(1e-9));
  CHECK(extrapolate_threshold(curve, 1e-5) == doctest::Approx(2.5).epsilon(1e-9));

  CalibrationCurve flat;
  CalibrationPoint p;
  p.mi_bits = 2.0;
  p.post_fec_ser = 1e-2;
  flat.points = {p};
  CHECK_THROWS_AS(extrapolate_threshold(flat, 1e-4), ConfigError);
}

TEST_CASE("curves survive the file round trip") {
  std::string dir = testutil::scratch_dir("curve");
  CalibrationCurve curve = synthetic_curve();
  curve.threshold_mi_bits = 2.4;
  std::string path = dir + "/curve.csv";
  save_calibration_curve(curve, path);
  CalibrationCurve back = load_calibration_curve(path);

  CHECK(back.code_id == curve.code_id);
  CHECK(back.target_ser == curve.target_ser);
  CHECK(back.seed == curve.seed);
  CHECK(back.kind == curve.kind);
  CHECK(back.threshold_mi_bits == curve.threshold_mi_bits);
  REQUIRE(back.points.size() == curve.points.size());
  for (size_t i = 0; i < curve.points.size(); ++i) {
    CHECK(back.points[i].mi_bits == curve.points[i].mi_bits);
    CHECK(back.points[i].post_fec_ser == curve.points[i].post_fec_ser);
  }
  CHECK_THROWS_AS(load_calibration_curve(dir + "/missing.csv"), InputError);
}

TEST_CASE("small-code calibration produces a usable curve") {
  const QcCode& code = testutil::small_code();
  Constellation c3 = builtin_constellation("c3");
  std::vector<const Constellation*> cs{&c3};
  // the q=20 expansion is weak; its 1e-2 crossing sits well above the
  // full-scale waterfall, so the sweep reaches 10.5 dB
  std::vector<double> grid{6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0, 10.5};

  CalibrateOptions opts;
  opts.sim.max_blocks = 60;
  opts.sim.target_block_errors = 15;
  opts.sim.target_symbol_errors = 80;
  opts.sim.db_cap_records = 4000;
  CalibrationCurve curve =
      calibrate(code, cs, LinkKind::awgn, 1e-2, grid, opts);

  CHECK(std::isfinite(curve.threshold_mi_bits));
  CHECK(curve.threshold_mi_bits > 2.0);
  CHECK(curve.threshold_mi_bits < 2.9);
  CHECK(curve.points.size() >= grid.size());
  for (size_t i = 1; i < curve.points.size(); ++i)
    CHECK(curve.points[i - 1].mi_bits <= curve.points[i].mi_bits);
  for (const auto& p : curve.points)
    CHECK(p.block_len == static_cast<long long>(code.n));

  // reading the pooled curve back at the threshold returns the target
  Prediction at_t = predict_post_fec(curve.threshold_mi_bits, curve);
  CHECK(std::abs(std::log10(at_t.post_fec_ser) - std::log10(1e-2)) < 1e-6);

  // determinism of the whole pipeline
  CalibrationCurve again =
      calibrate(code, cs, LinkKind::awgn, 1e-2, grid, opts);
  CHECK(again.threshold_mi_bits == curve.threshold_mi_bits);
  REQUIRE(again.points.size() == curve.points.size());
  for (size_t i = 0; i < curve.points.size(); ++i)
    CHECK(again.points[i].post_fec_ser == curve.points[i].post_fec_ser);
}

TEST_CASE("recorded transmissions decode through the coset scrambler") {
  const QcCode& code = testutil::small_code();
  Constellation c = builtin_constellation("c3");

  // clean recording: everything decodes
  MeasurementDb clean = make_awgn_db(c, 40.0, 3 * code.n + 137, 301);
  DecodeDbResult r = decode_db_post_fec(clean, c, code, 9);
  CHECK(r.frames == 3);
  CHECK(r.frame_errors == 0);
  CHECK(r.symbol_errors == 0);
  CHECK(r.post_fec_ser == 0.0);
  CHECK(std::abs(r.i_nb_bits - 3.0) < 0.02);

  DecodeDbResult r2 = decode_db_post_fec(clean, c, code, 9);
  CHECK(r2.symbol_errors == r.symbol_errors);
  CHECK(r2.sigma2_hat == r.sigma2_hat);

  // hopeless recording: the code is far past its threshold
  MeasurementDb dirty = make_awgn_db(c, 4.0, 2 * code.n, 302);
  DecodeDbResult bad = decode_db_post_fec(dirty, c, code, 9);
  CHECK(bad.post_fec_ser > 1e-1);
  CHECK(bad.fer == 1.0);

  MeasurementDb tiny = make_awgn_db(c, 10.0, code.n - 1, 303);
  CHECK_THROWS_AS(decode_db_post_fec(tiny, c, code, 9), InputError);
}

TEST_CASE("universality harness degenerate behavior") {
  const QcCode& code = testutil::small_code();
  Constellation c = builtin_constellation("c3");
  double sigma2 = esn0_db_to_sigma2(7.2);

  ChannelMix mix;
  mix.ch1 = {&c, LinkKind::awgn, sigma2};
  mix.ch2 = {&c, LinkKind::awgn, sigma2};

  SimOptions opts;
  opts.max_blocks = 12;
  opts.batch_blocks = 4;
  opts.target_block_errors = 1 << 30;
  opts.target_symbol_errors = 1 << 30;
  opts.db_cap_records = 1;

  std::vector<double> gammas{0.0, 0.25, 0.5, 0.75, 1.0};
  UniversalityResult u = universality_sweep(code, mix, gammas, opts);
  REQUIRE(u.entries.size() == gammas.size());
  CHECK(u.mi1_bits == u.mi2_bits);

  // interior gammas share one noise stream: identical ends, identical SER
  CHECK(u.entries[1].post_fec_ser == u.entries[2].post_fec_ser);
  CHECK(u.entries[2].post_fec_ser == u.entries[3].post_fec_ser);

  // endpoints reproduce the standalone single-channel runs
  PointResult solo = run_point(code, c, LinkKind::awgn,
                               sigma2_to_esn0_db(sigma2), opts);
  CHECK(u.entries[0].post_fec_ser == solo.post_fec_ser);
  CHECK(u.entries[4].post_fec_ser == solo.post_fec_ser);

  // and the deviation statistic reflects only Monte Carlo scatter
  CHECK(u.max_abs_dev <= 3 * (u.entries[0].post_fec_ser_se +
                              u.entries[2].post_fec_ser_se + 1e-12));

  // unequal information rates are refused
  ChannelMix off = mix;
  off.ch2.sigma2 = esn0_db_to_sigma2(9.5);
  CHECK_THROWS_AS(universality_sweep(code, off, gammas, opts), ConfigError);
}
