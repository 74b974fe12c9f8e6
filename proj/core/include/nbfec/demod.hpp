#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "nbfec/channel.hpp"
#include "nbfec/constellation.hpp"

namespace nbfec {

// All log-likelihood ratios are clamped to this magnitude (natural log
// units) so downstream sums stay finite.
inline constexpr double kLlrClamp = 50.0;

// Decoding metric q(y|s): either a circular Gaussian with assumed variance
// k per real dimension (possibly mismatched to the channel) or a DMC
// column read off a transition matrix.
struct GaussianMetric {
  double k = 0.5;
};
struct DmcMetric {
  DmcMatrix w;
};
using DecodingMetric = std::variant<GaussianMetric, DmcMetric>;

// log q(y|s) for the Gaussian metric, D=2: -|y-s|^2/(2k) - log(2 pi k).
double gaussian_log_metric(std::complex<double> y, std::complex<double> s, double k);

// Symbol LLR vector relative to symbol 0: out[i-1] = log q(y|s_i)/q(y|s_0)
// + log(prior_i/prior_0) for i = 1..M-1. `out` must hold M-1 values.
// With a DMC metric, y is first hard-decided to a received index.
void symbol_llrs(std::complex<double> y, const Constellation& c,
                 const DecodingMetric& q, double* out);

// Same, for a received DMC output index.
void dmc_llrs(size_t rx_index, const DmcMatrix& w, std::span<const double> priors,
              double* out);

// Flattened per-symbol LLRs for a block, stride M-1.
std::vector<double> symbol_llr_block(std::span<const std::complex<double>> ys,
                                     const Constellation& c,
                                     const DecodingMetric& q);

// Bit-level LLRs: out[b] = log of (sum of q*prior over points whose label
// bit b is 0) over (the same sum for bit 1), computed with log-sum-exp.
// `out` must hold m values. Bit 0 is the label MSB.
void bit_llrs(std::complex<double> y, const Constellation& c,
              const DecodingMetric& q, double* out);

}  // namespace nbfec
