#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nbfec/sim.hpp"

namespace nbfec {

struct CalibrationPoint {
  std::string constellation;
  double esn0_db = 0.0;
  double mi_bits = 0.0;  // crossing axis: estimated I_NB (soft) or I_hd (hard)
  double gmi_bits = 0.0;
  double pre_fec_ber = 0.0;
  double pre_fec_ser = 0.0;
  double post_fec_ser = 0.0;
  double post_fec_ser_se = 0.0;
  long long blocks = 0;
  long long block_len = 0;
};

// Post-FEC SER against mutual information for one code, pooled over the
// constellations it was calibrated with. The threshold is the MI at which
// the pooled curve crosses the target SER.
struct CalibrationCurve {
  std::string code_id;
  double target_ser = 1e-3;
  uint64_t seed = 0;
  LinkKind kind = LinkKind::awgn;
  std::vector<CalibrationPoint> points;  // sorted by mi_bits
  double threshold_mi_bits = std::numeric_limits<double>::quiet_NaN();
};

struct CalibrateOptions {
  SimOptions sim;
  double refine_mi_gap = 0.03;  // keep bisecting until the crossing bracket
                                // spans at most this much MI
  int max_refine = 6;           // extra points per constellation
  bool check_monotonic = true;  // 3 sigma isotonicity gate on raw points
};

// Sweeps each constellation over the Es/N0 grid, refines near the target
// crossing, and reads the pooled threshold off the (MI, log10 SER) trace.
CalibrationCurve calibrate(const QcCode& code,
                           const std::vector<const Constellation*>& cs,
                           LinkKind kind, double target_ser,
                           std::span<const double> esn0_grid,
                           const CalibrateOptions& opts = {});

// One (metric, SER) observation for threshold readout. floor_ser stands in
// for SER when no errors were seen (resolution limit of the run).
struct CrossSample {
  double x = 0.0;
  double ser = 0.0;
  double floor_ser = 1e-12;
};

// Metric value at which the samples cross the target SER, interpolating
// log10(SER) linearly in the metric. Works for either monotone direction.
// Throws ConfigError when no bracketing pair exists.
double crossing_at(std::vector<CrossSample> samples, double target_ser);

enum class CrossAxis { mi, gmi, pre_ber, pre_ser };

// Crossing restricted to one constellation's points (empty name = pooled)
// on the chosen x axis.
double curve_crossing(const CalibrationCurve& curve, CrossAxis axis,
                      const std::string& constellation, double target_ser);

// Threshold at a stricter target by straight-line fit of log10(SER) vs MI
// over the pooled waterfall points with 0 < SER <= ser_hi.
double extrapolate_threshold(const CalibrationCurve& curve, double target_ser,
                             double ser_hi = 0.1);

struct Prediction {
  double post_fec_ser = 0.0;
  double mi_lo = 0.0, mi_hi = 0.0;  // bracketing calibration points
  double ser_lo = 0.0, ser_hi = 0.0;
  bool extrapolated = false;
};

// Log-linear interpolation of the curve at the given MI; outside the
// calibrated range the edge segment is extended and flagged.
Prediction predict_post_fec(double mi_bits, const CalibrationCurve& curve);

void save_calibration_curve(const CalibrationCurve& curve, const std::string& path);
CalibrationCurve load_calibration_curve(const std::string& path);

// Decodes a recorded transmission against a code the recording never used:
// a seeded additive GF scrambler maps each frame onto a codeword coset,
// LLRs use the variance estimated from the db itself, and records are
// spread over frames by a seeded permutation.
struct DecodeDbResult {
  long long frames = 0;
  long long frame_errors = 0;
  long long symbol_errors = 0;
  double post_fec_ser = 0.0;
  double fer = 0.0;
  double sigma2_hat = 0.0;
  double i_nb_bits = 0.0;
};

DecodeDbResult decode_db_post_fec(const MeasurementDb& db,
                                  const Constellation& c, const QcCode& code,
                                  uint64_t seed, const SimOptions& opts = {});

// Post-FEC SER across the gamma mixing sweep of two MI-matched ends.
struct UniversalityEntry {
  double gamma = 0.0;
  long long blocks = 0;
  double post_fec_ser = 0.0;
  double post_fec_ser_se = 0.0;
  double fer = 0.0;
};

struct UniversalityResult {
  double mi1_bits = 0.0;  // per-end MI: quadrature (soft) or I_hd (hard)
  double mi2_bits = 0.0;
  std::vector<UniversalityEntry> entries;
  double max_abs_dev = 0.0;  // max |SER - mean SER| over the sweep
};

UniversalityResult universality_sweep(const QcCode& code, const ChannelMix& mix,
                                      std::span<const double> gammas,
                                      const SimOptions& opts,
                                      double mi_tol = 0.05);

}  // namespace nbfec
