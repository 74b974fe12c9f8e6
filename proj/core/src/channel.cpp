#include "nbfec/channel.hpp"

#include <cmath>
#include <string>

#include "nbfec/errors.hpp"
#include "nbfec/rng.hpp"

namespace nbfec {

double esn0_db_to_sigma2(double esn0_db) {
  double esn0 = std::pow(10.0, esn0_db / 10.0);
  return 1.0 / (2.0 * esn0);
}

double sigma2_to_esn0_db(double sigma2) {
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
  return 10.0 * std::log10(1.0 / (2.0 * sigma2));
}

std::vector<std::complex<double>> awgn_transmit(
    std::span<const std::complex<double>> x, const AwgnChannel& ch) {
  if (!(ch.sigma2 > 0.0)) throw ConfigError("awgn_transmit: sigma2 must be positive");
  Rng rng(ch.seed);
  double s = std::sqrt(ch.sigma2);
  std::vector<std::complex<double>> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + std::complex<double>(s * rng.normal(), s * rng.normal());
  }
  return y;
}

size_t hard_decide(std::complex<double> y, const Constellation& c) {
  size_t best = 0;
  double best_d = std::norm(y - c.points[0]);
  for (size_t i = 1; i < c.size(); ++i) {
    double d = std::norm(y - c.points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

DmcMatrix estimate_dmc(const Constellation& c, double sigma2,
                       size_t samples_per_symbol, uint64_t seed,
                       double floor_eps) {
  if (samples_per_symbol < 1) {
    throw ConfigError("estimate_dmc: need at least one sample per symbol");
  }
  if (!(sigma2 > 0.0)) throw ConfigError("estimate_dmc: sigma2 must be positive");

  size_t M = c.size();
  DmcMatrix w(M);
  double s = std::sqrt(sigma2);
  for (size_t k = 0; k < M; ++k) {
    Rng rng(derive_seed(seed, k));
    std::vector<size_t> counts(M, 0);
    for (size_t t = 0; t < samples_per_symbol; ++t) {
      std::complex<double> y =
          c.points[k] + std::complex<double>(s * rng.normal(), s * rng.normal());
      ++counts[hard_decide(y, c)];
    }
    double total = 0.0;
    for (size_t j = 0; j < M; ++j) {
      double v = static_cast<double>(counts[j]) / static_cast<double>(samples_per_symbol);
      if (v < floor_eps) v = floor_eps;
      w.at(j, k) = v;
      total += v;
    }
    for (size_t j = 0; j < M; ++j) w.at(j, k) /= total;
  }
  return w;
}

size_t mix_boundary(size_t n, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("mix: gamma must be in [0, 1]");
  return static_cast<size_t>(std::llround(gamma * static_cast<double>(n)));
}

std::vector<std::complex<double>> mix_transmit(std::span<const uint8_t> u,
                                               const ChannelMix& mix,
                                               uint64_t seed) {
  const MixEnd& a = mix.ch1;
  const MixEnd& b = mix.ch2;
  if (a.constellation == nullptr || b.constellation == nullptr) {
    throw ConfigError("mix_transmit: both channel ends need a constellation");
  }
  if (a.constellation->size() != b.constellation->size()) {
    throw ConfigError("mix_transmit: component channels have mismatched alphabets (" +
                      std::to_string(a.constellation->size()) + " vs " +
                      std::to_string(b.constellation->size()) + ")");
  }
  size_t split = mix_boundary(u.size(), mix.gamma);
  Rng rng(seed);
  std::vector<std::complex<double>> y(u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    const MixEnd& end = i < split ? a : b;
    const Constellation& c = *end.constellation;
    if (u[i] >= c.size()) throw InputError("mix_transmit: symbol out of range");
    double s = std::sqrt(end.sigma2);
    std::complex<double> r =
        c.points[u[i]] + std::complex<double>(s * rng.normal(), s * rng.normal());
    y[i] = end.kind == LinkKind::awgn_hard ? c.points[hard_decide(r, c)] : r;
  }
  return y;
}

}  // namespace nbfec
