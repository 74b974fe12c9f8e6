#include "nbfec/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "nbfec/errors.hpp"
#include "nbfec/parallel.hpp"

namespace nbfec {
namespace {

constexpr double kLn2 = 0.6931471805599453;

double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Nodes and weights for integrating f(x) exp(-x^2) dx. Newton iteration on
// the normalized Hermite recurrence; roots come out symmetric about 0.
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double eps = 3e-14;
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = 0.7511255444649425;  // pi^(-1/4)
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

double mi_sd_order(const Constellation& c, double sigma2, int order) {
  std::vector<double> gx, gw;
  gauss_hermite(order, gx, gw);
  const size_t M = c.size();
  const double scale = std::sqrt(2.0 * sigma2);
  const double inv2s2 = 1.0 / (2.0 * sigma2);
  std::vector<double> logpri(M);
  for (size_t i = 0; i < M; ++i) logpri[i] = std::log(c.priors[i]);

  // 1/pi from the two Gauss-Hermite weight normalizations.
  const double wnorm = 1.0 / M_PI;
  double total = 0.0;
  for (size_t i = 0; i < M; ++i) {
    KahanSum acc;
    for (int a = 0; a < order; ++a) {
      for (int b = 0; b < order; ++b) {
        std::complex<double> y =
            c.points[i] + std::complex<double>(scale * gx[a], scale * gx[b]);
        double own = -(gx[a] * gx[a] + gx[b] * gx[b]);
        double mx = -HUGE_VAL;
        thread_local std::vector<double> ex;
        ex.resize(M);
        for (size_t j = 0; j < M; ++j) {
          ex[j] = logpri[j] - std::norm(y - c.points[j]) * inv2s2;
          mx = std::max(mx, ex[j]);
        }
        double s = 0.0;
        for (size_t j = 0; j < M; ++j) s += std::exp(ex[j] - mx);
        double lse = mx + std::log(s);
        acc.add(gw[a] * gw[b] * (own - lse));
      }
    }
    total += c.priors[i] * wnorm * acc.sum;
  }
  return total / kLn2;
}

// Per-record log metrics ln q(y|s_j) with any j-independent constant
// dropped (it cancels between the numerator and the prior mixture).
struct InfoDensityWorkspace {
  size_t n = 0;
  size_t M = 0;
  int m_bits = 0;
  std::vector<double> a;  // n*M
  std::vector<double> logpri;
  const std::vector<uint8_t>* tx = nullptr;
  bool gaussian = false;
  double metric_k = 0.0;
  bool degenerate = false;

  double term(size_t rec, double nu) const {
    const double* row = &a[rec * M];
    double mx = -HUGE_VAL;
    for (size_t j = 0; j < M; ++j) mx = std::max(mx, logpri[j] + nu * row[j]);
    double s = 0.0;
    for (size_t j = 0; j < M; ++j) s += std::exp(logpri[j] + nu * row[j] - mx);
    return nu * row[(*tx)[rec]] - (mx + std::log(s));
  }

  double j_bits(double nu, int workers) const {
    double total = chunked_kahan_sum(
        n, workers, [&](size_t rec) { return term(rec, nu); });
    return total / (static_cast<double>(n) * kLn2);
  }

  double stderr_bits(double nu, int workers) const {
    double mean = j_bits(nu, workers) * kLn2;  // back to nats per record
    double ss = chunked_kahan_sum(n, workers, [&](size_t rec) {
      double d = term(rec, nu) - mean;
      return d * d;
    });
    double var = ss / (static_cast<double>(n) * static_cast<double>(n));
    return std::sqrt(var) / kLn2;
  }
};

InfoDensityWorkspace build_workspace(const MeasurementDb& db, const Constellation& c,
                                     const DecodingMetric& q, int workers) {
  if (db.size() < 1) throw InputError("measurement db is empty");
  if (db.alphabet != c.size()) {
    throw InputError("measurement db alphabet M=" + std::to_string(db.alphabet) +
                     " does not match constellation M=" + std::to_string(c.size()));
  }
  InfoDensityWorkspace ws;
  ws.n = db.size();
  ws.M = c.size();
  ws.m_bits = c.m;
  ws.tx = &db.tx;
  ws.a.resize(ws.n * ws.M);
  ws.logpri.resize(ws.M);
  for (size_t j = 0; j < ws.M; ++j) ws.logpri[j] = std::log(c.priors[j]);

  if (const auto* g = std::get_if<GaussianMetric>(&q)) {
    if (!(g->k > 0.0)) throw ConfigError("gaussian metric: k must be positive");
    ws.gaussian = true;
    ws.metric_k = g->k;
    double inv2k = 1.0 / (2.0 * g->k);
    parallel_for((ws.n + kReduceChunk - 1) / kReduceChunk, workers, [&](size_t ci) {
      size_t lo = ci * kReduceChunk, hi = std::min(ws.n, lo + kReduceChunk);
      for (size_t rec = lo; rec < hi; ++rec) {
        for (size_t j = 0; j < ws.M; ++j) {
          ws.a[rec * ws.M + j] = -std::norm(db.rx[rec] - c.points[j]) * inv2k;
        }
      }
    });
  } else {
    const auto& w = std::get<DmcMetric>(q).w;
    if (w.m != ws.M) throw ConfigError("DMC metric size does not match constellation");
    parallel_for((ws.n + kReduceChunk - 1) / kReduceChunk, workers, [&](size_t ci) {
      size_t lo = ci * kReduceChunk, hi = std::min(ws.n, lo + kReduceChunk);
      for (size_t rec = lo; rec < hi; ++rec) {
        size_t jrx = hard_decide(db.rx[rec], c);
        for (size_t j = 0; j < ws.M; ++j) {
          ws.a[rec * ws.M + j] = std::log(w.at(jrx, j));
        }
      }
    });
  }

  ws.degenerate = true;
  for (size_t rec = 1; rec < ws.n && ws.degenerate; ++rec) {
    if (db.rx[rec] != db.rx[0]) ws.degenerate = false;
  }
  return ws;
}

INbResult maximize_info_density(const InfoDensityWorkspace& ws, const INbOptions& opts) {
  if (!(opts.nu_lo > 0.0) || !(opts.nu_hi > opts.nu_lo)) {
    throw ConfigError("estimate_i_nb: need 0 < nu_lo < nu_hi");
  }
  INbResult res;
  if (ws.n < 1000) {
    res.warnings.push_back("fewer than 1000 records; estimate will be noisy");
  }
  if (ws.degenerate) {
    res.warnings.push_back("degenerate db: all received samples identical");
  }

  // Log-spaced pre-scan, then golden-section refinement of the bracket
  // around the best grid point. nu = 1 is always evaluated so the
  // untilted value can never exceed the reported maximum.
  int g = std::max(opts.grid_points, 3);
  double llo = std::log(opts.nu_lo), lhi = std::log(opts.nu_hi);
  std::vector<double> lnu(g);
  for (int i = 0; i < g; ++i) {
    lnu[i] = llo + (lhi - llo) * static_cast<double>(i) / (g - 1);
  }
  std::vector<double> jv(g);
  int best = 0;
  for (int i = 0; i < g; ++i) {
    jv[i] = ws.j_bits(std::exp(lnu[i]), opts.workers);
    if (jv[i] > jv[best]) best = i;
  }
  double blo = lnu[std::max(best - 1, 0)];
  double bhi = lnu[std::min(best + 1, g - 1)];
  GoldenResult gr = golden_section_max(
      [&](double u) { return ws.j_bits(std::exp(u), opts.workers); }, blo, bhi,
      opts.tol_log_nu);

  double best_nu = std::exp(gr.argmax);
  double best_j = gr.max;
  if (jv[best] > best_j) {
    best_j = jv[best];
    best_nu = std::exp(lnu[best]);
  }
  double j1 = ws.j_bits(1.0, opts.workers);
  if (j1 > best_j) {
    best_j = j1;
    best_nu = 1.0;
  }

  if (best_nu <= opts.nu_lo * 1.0001 || best_nu >= opts.nu_hi * 0.9999) {
    res.warnings.push_back("nu maximizer at search boundary");
  }
  if (best_j < 0.0 || best_j > static_cast<double>(ws.m_bits)) {
    res.warnings.push_back("information estimate clamped to [0, m]");
    best_j = std::clamp(best_j, 0.0, static_cast<double>(ws.m_bits));
  }

  res.i_nb_bits = best_j;
  res.nu_hat = best_nu;
  res.sigma2_hat = ws.gaussian ? ws.metric_k / best_nu
                               : std::numeric_limits<double>::quiet_NaN();
  res.stderr_bits = ws.stderr_bits(best_nu, opts.workers);
  return res;
}

double gmi_from_workspace(const MeasurementDb& db, const Constellation& c,
                          const DecodingMetric& q, int workers) {
  size_t n = db.size();
  double total = chunked_kahan_sum(n, workers, [&](size_t rec) {
    thread_local std::vector<double> lb;
    lb.resize(c.m);
    bit_llrs(db.rx[rec], c, q, lb.data());
    double t = -std::log2(c.priors[db.tx[rec]]);
    for (int b = 0; b < c.m; ++b) {
      double sign = c.label_bit(db.tx[rec], b) == 0 ? -1.0 : 1.0;
      t -= log1pexp(sign * lb[b]) / kLn2;
    }
    return t;
  });
  return total / static_cast<double>(n);
}

}  // namespace

GoldenResult golden_section_max(const std::function<double(double)>& f,
                                double lo, double hi, double tol) {
  if (!(lo < hi)) throw InputError("golden_section_max: need lo < hi");
  if (!(tol > 0.0)) throw InputError("golden_section_max: tol must be positive");
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c1 = b - invphi * (b - a);
  double c2 = a + invphi * (b - a);
  double f1 = f(c1), f2 = f(c2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + invphi * (b - a);
      f2 = f(c2);
    } else {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - invphi * (b - a);
      f1 = f(c1);
    }
  }
  double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

double mi_sd_numeric(const Constellation& c, double sigma2, double tol) {
  if (!(sigma2 > 0.0)) throw ConfigError("mi_sd_numeric: sigma2 must be positive");
  double prev = mi_sd_order(c, sigma2, 32);
  for (int order = 64; order <= 512; order *= 2) {
    double cur = mi_sd_order(c, sigma2, order);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  throw ConfigError("mi_sd_numeric: quadrature did not converge at order 512");
}

INbResult estimate_i_nb(const MeasurementDb& db, const Constellation& c,
                        const DecodingMetric& q, const INbOptions& opts) {
  InfoDensityWorkspace ws = build_workspace(db, c, q, opts.workers);
  return maximize_info_density(ws, opts);
}

double aclb(const MeasurementDb& db, const Constellation& c,
            const DecodingMetric& q, int workers) {
  InfoDensityWorkspace ws = build_workspace(db, c, q, workers);
  return ws.j_bits(1.0, workers);
}

double gmi(const MeasurementDb& db, const Constellation& c,
           const DecodingMetric& q, int workers) {
  if (db.size() < 1) throw InputError("measurement db is empty");
  if (db.alphabet != c.size()) throw InputError("db alphabet does not match constellation");
  return gmi_from_workspace(db, c, q, workers);
}

PreFecRates pre_fec_rates(const MeasurementDb& db, const Constellation& c) {
  if (db.size() < 1) throw InputError("measurement db is empty");
  if (db.alphabet != c.size()) throw InputError("db alphabet does not match constellation");
  size_t sym_err = 0, bit_err = 0;
  for (size_t rec = 0; rec < db.size(); ++rec) {
    size_t j = hard_decide(db.rx[rec], c);
    if (j != db.tx[rec]) ++sym_err;
    bit_err += std::popcount(
        static_cast<unsigned>(c.labels[j] ^ c.labels[db.tx[rec]]));
  }
  PreFecRates r;
  r.ser = static_cast<double>(sym_err) / static_cast<double>(db.size());
  r.ber = static_cast<double>(bit_err) /
          (static_cast<double>(db.size()) * static_cast<double>(c.m));
  return r;
}

double mi_hd(const DmcMatrix& w, std::span<const double> priors) {
  if (w.m < 2) throw InputError("mi_hd: matrix must be at least 2x2");
  if (priors.size() != w.m) throw InputError("mi_hd: priors size mismatch");
  double psum = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw InputError("mi_hd: priors must be positive");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-9) throw InputError("mi_hd: priors must sum to 1");
  for (size_t k = 0; k < w.m; ++k) {
    double col = 0.0;
    for (size_t j = 0; j < w.m; ++j) {
      if (w.at(j, k) < 0.0) throw InputError("mi_hd: negative transition probability");
      col += w.at(j, k);
    }
    if (std::abs(col - 1.0) > 1e-9) {
      throw InputError("mi_hd: column " + std::to_string(k) + " does not sum to 1");
    }
  }

  double total = 0.0;
  for (size_t j = 0; j < w.m; ++j) {
    double qj = 0.0;
    for (size_t k = 0; k < w.m; ++k) qj += w.at(j, k) * priors[k];
    if (qj <= 0.0) continue;
    for (size_t i = 0; i < w.m; ++i) {
      double v = w.at(j, i);
      if (v <= 0.0) continue;
      total += v * priors[i] * std::log2(v / qj);
    }
  }
  return std::max(total, 0.0);
}

MetricReport analyze(const MeasurementDb& db, const Constellation& c,
                     const DecodingMetric& q, const INbOptions& opts) {
  InfoDensityWorkspace ws = build_workspace(db, c, q, opts.workers);
  INbResult nb = maximize_info_density(ws, opts);

  MetricReport rep;
  rep.i_nb_bits = nb.i_nb_bits;
  rep.nu_hat = nb.nu_hat;
  rep.sigma2_hat = nb.sigma2_hat;
  rep.i_nb_stderr_bits = nb.stderr_bits;
  rep.warnings = nb.warnings;
  rep.aclb_bits = ws.j_bits(1.0, opts.workers);
  rep.gmi_bits = gmi_from_workspace(db, c, q, opts.workers);
  PreFecRates pre = pre_fec_rates(db, c);
  rep.pre_fec_ber = pre.ber;
  rep.pre_fec_ser = pre.ser;
  rep.n_records = db.size();
  return rep;
}

}  // namespace nbfec
