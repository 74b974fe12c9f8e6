#include "nbfec/demod.hpp"

#include <algorithm>
#include <cmath>

#include "nbfec/errors.hpp"

namespace nbfec {
namespace {

double clamp_llr(double v) { return std::clamp(v, -kLlrClamp, kLlrClamp); }

// Clamp the weighted log metrics to a window of kLlrClamp below their
// maximum, then re-reference against index 0. A naive per-ratio clamp is
// not order preserving: once the noise is small enough that several
// ratios saturate at +kLlrClamp the best symbol becomes ambiguous. Keeping
// the window anchored at the max leaves every ratio within +-kLlrClamp
// while ties can only appear among symbols that were hopeless anyway.
void windowed_ratios(const std::vector<double>& lw, double* out) {
  double mx = *std::max_element(lw.begin(), lw.end());
  double t0 = std::max(lw[0] - mx, -kLlrClamp);
  for (size_t i = 1; i < lw.size(); ++i) {
    out[i - 1] = std::max(lw[i] - mx, -kLlrClamp) - t0;
  }
}

// log q(y|s_i) + log prior_i for every point, shared by the LLR routines.
// The Gaussian normalization constant is omitted: it cancels in every
// ratio computed here.
void weighted_log_metrics(std::complex<double> y, const Constellation& c,
                          const DecodingMetric& q, std::vector<double>& out) {
  size_t M = c.size();
  out.resize(M);
  if (const auto* g = std::get_if<GaussianMetric>(&q)) {
    if (!(g->k > 0.0)) throw ConfigError("gaussian metric: k must be positive");
    double inv2k = 1.0 / (2.0 * g->k);
    for (size_t i = 0; i < M; ++i) {
      out[i] = -std::norm(y - c.points[i]) * inv2k + std::log(c.priors[i]);
    }
  } else {
    const auto& w = std::get<DmcMetric>(q).w;
    if (w.m != M) throw ConfigError("DMC metric size does not match constellation");
    size_t j = hard_decide(y, c);
    for (size_t i = 0; i < M; ++i) {
      out[i] = std::log(w.at(j, i)) + std::log(c.priors[i]);
    }
  }
}

}  // namespace

double gaussian_log_metric(std::complex<double> y, std::complex<double> s, double k) {
  if (!(k > 0.0)) throw ConfigError("gaussian metric: k must be positive");
  return -std::norm(y - s) / (2.0 * k) - std::log(2.0 * M_PI * k);
}

void symbol_llrs(std::complex<double> y, const Constellation& c,
                 const DecodingMetric& q, double* out) {
  thread_local std::vector<double> lw;
  weighted_log_metrics(y, c, q, lw);
  windowed_ratios(lw, out);
}

void dmc_llrs(size_t rx_index, const DmcMatrix& w, std::span<const double> priors,
              double* out) {
  if (rx_index >= w.m) throw InputError("dmc_llrs: received index out of range");
  if (priors.size() != w.m) throw InputError("dmc_llrs: priors size mismatch");
  thread_local std::vector<double> lw;
  lw.resize(w.m);
  for (size_t i = 0; i < w.m; ++i) {
    lw[i] = std::log(w.at(rx_index, i)) + std::log(priors[i]);
  }
  windowed_ratios(lw, out);
}

std::vector<double> symbol_llr_block(std::span<const std::complex<double>> ys,
                                     const Constellation& c,
                                     const DecodingMetric& q) {
  size_t stride = c.size() - 1;
  std::vector<double> out(ys.size() * stride);
  for (size_t i = 0; i < ys.size(); ++i) symbol_llrs(ys[i], c, q, &out[i * stride]);
  return out;
}

void bit_llrs(std::complex<double> y, const Constellation& c,
              const DecodingMetric& q, double* out) {
  thread_local std::vector<double> lw;
  weighted_log_metrics(y, c, q, lw);
  size_t M = c.size();
  for (int b = 0; b < c.m; ++b) {
    double max0 = -HUGE_VAL, max1 = -HUGE_VAL;
    for (size_t i = 0; i < M; ++i) {
      double& mx = c.label_bit(i, b) == 0 ? max0 : max1;
      mx = std::max(mx, lw[i]);
    }
    double s0 = 0.0, s1 = 0.0;
    for (size_t i = 0; i < M; ++i) {
      if (c.label_bit(i, b) == 0) {
        s0 += std::exp(lw[i] - max0);
      } else {
        s1 += std::exp(lw[i] - max1);
      }
    }
    out[b] = clamp_llr((max0 + std::log(s0)) - (max1 + std::log(s1)));
  }
}

}  // namespace nbfec
