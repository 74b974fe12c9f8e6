#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nbfec/constellation.hpp"
#include "nbfec/demod.hpp"
#include "nbfec/measurement_db.hpp"

namespace nbfec {

struct GoldenResult {
  double argmax = 0.0;
  double max = 0.0;
};

// Golden-section search for the maximum of a unimodal function on [lo, hi].
// The returned argmax is within `tol` of the true one (for monotone f it
// converges to the boundary).
GoldenResult golden_section_max(const std::function<double(double)>& f,
                                double lo, double hi, double tol = 1e-8);

// Symbol-wise mutual information of the constellation over AWGN with
// matched decoding, in bits/symbol. Gauss-Hermite quadrature per real
// dimension; the order is doubled until two consecutive estimates agree
// within `tol`.
double mi_sd_numeric(const Constellation& c, double sigma2, double tol = 1e-4);

struct INbOptions {
  double nu_lo = 1e-3;
  double nu_hi = 1e3;
  int grid_points = 25;     // log-spaced pre-scan of the tilt parameter
  double tol_log_nu = 1e-6;
  int workers = 1;
};

struct INbResult {
  double i_nb_bits = 0.0;
  double nu_hat = 1.0;
  double sigma2_hat = 0.0;  // NaN when the metric carries no variance
  double stderr_bits = 0.0;
  std::vector<std::string> warnings;
};

// Mismatched-decoding mutual information estimate from a recorded
// transmission: the empirical average of the per-record information
// density, maximized over the tilt parameter nu. For a Gaussian metric
// with assumed variance k the maximizer doubles as a noise-variance
// estimate sigma2_hat = k / nu_hat.
INbResult estimate_i_nb(const MeasurementDb& db, const Constellation& c,
                        const DecodingMetric& q, const INbOptions& opts = {});

// The same functional evaluated at nu = 1 (no tilt): a lower bound on the
// nu-optimized value by construction.
double aclb(const MeasurementDb& db, const Constellation& c,
            const DecodingMetric& q, int workers = 1);

// Bit-level (BICM) rate estimate from the recorded transmission.
double gmi(const MeasurementDb& db, const Constellation& c,
           const DecodingMetric& q, int workers = 1);

struct PreFecRates {
  double ber = 0.0;
  double ser = 0.0;
};

// Hard-decision error rates of the raw transmission.
PreFecRates pre_fec_rates(const MeasurementDb& db, const Constellation& c);

// Exact mutual information of a DMC with the given input priors, in bits.
double mi_hd(const DmcMatrix& w, std::span<const double> priors);

// Everything above computed off one shared workspace.
struct MetricReport {
  double i_nb_bits = 0.0;
  double nu_hat = 1.0;
  double sigma2_hat = 0.0;
  double i_nb_stderr_bits = 0.0;
  double aclb_bits = 0.0;
  double gmi_bits = 0.0;
  double pre_fec_ber = 0.0;
  double pre_fec_ser = 0.0;
  size_t n_records = 0;
  std::vector<std::string> warnings;
};

MetricReport analyze(const MeasurementDb& db, const Constellation& c,
                     const DecodingMetric& q, const INbOptions& opts = {});

}  // namespace nbfec
