#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nbfec/constellation.hpp"

namespace nbfec {

// Noise variance is sigma^2 per real dimension. For unit-energy
// constellations Es/N0 = 1 / (2 sigma^2).
double esn0_db_to_sigma2(double esn0_db);
double sigma2_to_esn0_db(double sigma2);

struct AwgnChannel {
  double sigma2 = 0.0;
  uint64_t seed = 0;
};

// Adds circular white Gaussian noise; deterministic for a fixed seed.
std::vector<std::complex<double>> awgn_transmit(
    std::span<const std::complex<double>> x, const AwgnChannel& ch);

// Nearest constellation point in Euclidean distance; ties resolve to the
// lowest index.
size_t hard_decide(std::complex<double> y, const Constellation& c);

// Column-stochastic transition matrix of a discrete memoryless channel:
// p(j, k) = P(receive index j | send index k).
struct DmcMatrix {
  size_t m = 0;
  std::vector<double> p;  // m*m, row-major p[j*m + k]

  DmcMatrix() = default;
  explicit DmcMatrix(size_t m_) : m(m_), p(m_ * m_, 0.0) {}
  double& at(size_t j, size_t k) { return p[j * m + k]; }
  double at(size_t j, size_t k) const { return p[j * m + k]; }
};

// Monte Carlo estimate of the hard-decision DMC for an AWGN channel:
// `samples_per_symbol` transmissions per input symbol, hard decided and
// column normalized. Zero cells are floored at `floor_eps` before the
// final renormalization so downstream log-ratios stay finite.
DmcMatrix estimate_dmc(const Constellation& c, double sigma2,
                       size_t samples_per_symbol, uint64_t seed,
                       double floor_eps = 1e-12);

// ---- channel mixing -------------------------------------------------------

enum class LinkKind {
  awgn,       // soft output y
  awgn_hard,  // AWGN followed by a hard decision; emits the decided point
};

struct MixEnd {
  const Constellation* constellation = nullptr;
  LinkKind kind = LinkKind::awgn;
  double sigma2 = 0.0;
};

struct ChannelMix {
  MixEnd ch1;
  MixEnd ch2;
  double gamma = 0.0;  // fraction of each block routed through ch1
};

// Number of leading symbols routed through ch1 (gamma*n rounded to nearest).
size_t mix_boundary(size_t n, double gamma);

// Routes the first mix_boundary(n, gamma) symbols through ch1 and the rest
// through ch2. Both ends share one noise stream in transmission order, so
// gamma = 0 / 1 and the identical-ends case reproduce a single channel
// exactly. The ends may use different geometries but must share the symbol
// alphabet.
std::vector<std::complex<double>> mix_transmit(std::span<const uint8_t> u,
                                               const ChannelMix& mix,
                                               uint64_t seed);

}  // namespace nbfec
