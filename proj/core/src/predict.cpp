#include "nbfec/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nbfec/csv.hpp"
#include "nbfec/demod.hpp"
#include "nbfec/errors.hpp"
#include "nbfec/parallel.hpp"
#include "nbfec/rng.hpp"

namespace nbfec {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double effective_ser(const CrossSample& s) {
  double v = s.ser > 0.0 ? s.ser : std::max(s.floor_ser, 1e-300);
  return v;
}

CalibrationPoint to_point(const PointResult& r, const std::string& cname,
                          size_t block_len) {
  CalibrationPoint p;
  p.constellation = cname;
  p.esn0_db = r.esn0_db;
  p.mi_bits = r.kind == LinkKind::awgn ? r.metrics.i_nb_bits : r.i_hd_bits;
  p.gmi_bits = r.metrics.gmi_bits;
  p.pre_fec_ber = r.metrics.pre_fec_ber;
  p.pre_fec_ser = r.metrics.pre_fec_ser;
  p.post_fec_ser = r.post_fec_ser;
  p.post_fec_ser_se = r.post_fec_ser_se;
  p.blocks = r.blocks;
  p.block_len = static_cast<long long>(block_len);
  return p;
}

double point_floor(const CalibrationPoint& p) {
  double sym = static_cast<double>(p.blocks) * p.block_len;
  return sym > 0 ? 0.3 / sym : 1e-12;
}

double axis_value(const CalibrationPoint& p, CrossAxis axis) {
  switch (axis) {
    case CrossAxis::mi: return p.mi_bits;
    case CrossAxis::gmi: return p.gmi_bits;
    case CrossAxis::pre_ber: return p.pre_fec_ber;
    case CrossAxis::pre_ser: return p.pre_fec_ser;
  }
  return kNan;
}

}  // namespace

double crossing_at(std::vector<CrossSample> samples, double target_ser) {
  if (samples.size() < 2) {
    throw ConfigError("crossing: need at least two sweep points");
  }
  if (!(target_ser > 0.0)) throw ConfigError("crossing: target must be positive");
  std::sort(samples.begin(), samples.end(),
            [](const CrossSample& a, const CrossSample& b) { return a.x < b.x; });

  // direction of the SER trend along the axis, from a least-squares slope
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const CrossSample& s : samples) {
    double y = std::log10(effective_ser(s));
    sx += s.x;
    sy += y;
    sxx += s.x * s.x;
    sxy += s.x * y;
  }
  double n = static_cast<double>(samples.size());
  double slope = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-300);
  if (slope > 0.0) {
    for (CrossSample& s : samples) s.x = -s.x;
    std::sort(samples.begin(), samples.end(),
              [](const CrossSample& a, const CrossSample& b) { return a.x < b.x; });
  }

  double lt = std::log10(target_ser);
  for (size_t i = 0; i + 1 < samples.size(); ++i) {
    double ya = std::log10(effective_ser(samples[i]));
    double yb = std::log10(effective_ser(samples[i + 1]));
    if (ya >= lt && lt >= yb) {
      double t = ya == yb ? 0.5 : (lt - ya) / (yb - ya);
      double xc = samples[i].x + t * (samples[i + 1].x - samples[i].x);
      return slope > 0.0 ? -xc : xc;
    }
  }
  double lo = effective_ser(samples.front()), hi = lo;
  for (const CrossSample& s : samples) {
    lo = std::min(lo, effective_ser(s));
    hi = std::max(hi, effective_ser(s));
  }
  std::ostringstream msg;
  msg << "crossing: target SER " << target_ser
      << " not bracketed by the sweep (observed range " << lo << " .. " << hi
      << ")";
  throw ConfigError(msg.str());
}

double curve_crossing(const CalibrationCurve& curve, CrossAxis axis,
                      const std::string& constellation, double target_ser) {
  std::vector<CrossSample> samples;
  for (const CalibrationPoint& p : curve.points) {
    if (!constellation.empty() && p.constellation != constellation) continue;
    samples.push_back({axis_value(p, axis), p.post_fec_ser, point_floor(p)});
  }
  return crossing_at(std::move(samples), target_ser);
}

CalibrationCurve calibrate(const QcCode& code,
                           const std::vector<const Constellation*>& cs,
                           LinkKind kind, double target_ser,
                           std::span<const double> esn0_grid,
                           const CalibrateOptions& opts) {
  if (cs.empty()) throw ConfigError("calibrate: no constellations given");
  if (esn0_grid.empty()) throw ConfigError("calibrate: empty Es/N0 grid");
  if (!(target_ser > 0.0 && target_ser < 1.0)) {
    throw ConfigError("calibrate: target SER must be in (0, 1)");
  }

  CalibrationCurve curve;
  curve.code_id = code.id;
  curve.target_ser = target_ser;
  curve.seed = opts.sim.seed;
  curve.kind = kind;

  for (const Constellation* c : cs) {
    std::vector<CalibrationPoint> pts;
    for (double esn0 : esn0_grid) {
      pts.push_back(to_point(run_point(code, *c, kind, esn0, opts.sim),
                             c->name, code.n));
    }

    // bisect the Es/N0 bracket around the crossing until it is tight in MI
    for (int r = 0; r < opts.max_refine; ++r) {
      std::sort(pts.begin(), pts.end(),
                [](const CalibrationPoint& a, const CalibrationPoint& b) {
                  return a.esn0_db < b.esn0_db;
                });
      int bracket = -1;
      for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double sa = pts[i].post_fec_ser > 0 ? pts[i].post_fec_ser
                                            : point_floor(pts[i]);
        double sb = pts[i + 1].post_fec_ser > 0 ? pts[i + 1].post_fec_ser
                                                : point_floor(pts[i + 1]);
        if (sa >= target_ser && target_ser >= sb) {
          bracket = static_cast<int>(i);
          break;
        }
      }
      if (bracket < 0) break;
      if (std::abs(pts[bracket + 1].mi_bits - pts[bracket].mi_bits) <=
          opts.refine_mi_gap) {
        break;
      }
      double mid = 0.5 * (pts[bracket].esn0_db + pts[bracket + 1].esn0_db);
      pts.push_back(
          to_point(run_point(code, *c, kind, mid, opts.sim), c->name, code.n));
    }

    if (opts.check_monotonic) {
      std::vector<CalibrationPoint> sorted = pts;
      std::sort(sorted.begin(), sorted.end(),
                [](const CalibrationPoint& a, const CalibrationPoint& b) {
                  return a.mi_bits < b.mi_bits;
                });
      for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        double rise = sorted[i + 1].post_fec_ser - sorted[i].post_fec_ser;
        double sig = std::sqrt(sorted[i].post_fec_ser_se * sorted[i].post_fec_ser_se +
                               sorted[i + 1].post_fec_ser_se * sorted[i + 1].post_fec_ser_se);
        if (rise > 3.0 * sig && rise > 1e-12) {
          std::ostringstream msg;
          msg << "calibrate: post-FEC SER not monotone in MI for "
              << c->name << ": " << sorted[i].post_fec_ser << " @ "
              << sorted[i].mi_bits << " bits vs " << sorted[i + 1].post_fec_ser
              << " @ " << sorted[i + 1].mi_bits << " bits (" << rise / std::max(sig, 1e-300)
              << " sigma)";
          throw ConfigError(msg.str());
        }
      }
    }

    curve.points.insert(curve.points.end(), pts.begin(), pts.end());
  }

  std::sort(curve.points.begin(), curve.points.end(),
            [](const CalibrationPoint& a, const CalibrationPoint& b) {
              return a.mi_bits < b.mi_bits;
            });
  curve.threshold_mi_bits = curve_crossing(curve, CrossAxis::mi, "", target_ser);
  return curve;
}

double extrapolate_threshold(const CalibrationCurve& curve, double target_ser,
                             double ser_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const CalibrationPoint& p : curve.points) {
    if (p.post_fec_ser <= 0.0 || p.post_fec_ser > ser_hi) continue;
    double y = std::log10(p.post_fec_ser);
    sx += p.mi_bits;
    sy += y;
    sxx += p.mi_bits * p.mi_bits;
    sxy += p.mi_bits * y;
    ++n;
  }
  if (n < 2) {
    throw ConfigError("extrapolate_threshold: need at least two waterfall points "
                      "with 0 < SER <= " + std::to_string(ser_hi));
  }
  double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) {
    throw ConfigError("extrapolate_threshold: degenerate MI spread in waterfall");
  }
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  if (slope >= 0.0) {
    throw ConfigError("extrapolate_threshold: waterfall slope is not negative");
  }
  return (std::log10(target_ser) - intercept) / slope;
}

Prediction predict_post_fec(double mi_bits, const CalibrationCurve& curve) {
  std::vector<std::pair<double, double>> pts;  // (mi, ser>0)
  for (const CalibrationPoint& p : curve.points) {
    if (p.post_fec_ser > 0.0) pts.emplace_back(p.mi_bits, p.post_fec_ser);
  }
  if (pts.empty()) {
    throw InputError("predict: calibration curve has no positive-SER points");
  }
  std::sort(pts.begin(), pts.end());

  Prediction out;
  for (const auto& [mi, ser] : pts) {
    if (mi == mi_bits) {
      out.post_fec_ser = ser;
      out.mi_lo = out.mi_hi = mi;
      out.ser_lo = out.ser_hi = ser;
      return out;
    }
  }
  if (pts.size() == 1) {
    out.post_fec_ser = pts[0].second;
    out.mi_lo = out.mi_hi = pts[0].first;
    out.ser_lo = out.ser_hi = pts[0].second;
    out.extrapolated = true;
    return out;
  }

  size_t hi = 0;
  while (hi < pts.size() && pts[hi].first < mi_bits) ++hi;
  out.extrapolated = hi == 0 || hi == pts.size();
  size_t b = std::clamp<size_t>(hi, 1, pts.size() - 1);
  size_t a = b - 1;
  double la = std::log10(pts[a].second), lb = std::log10(pts[b].second);
  double t = (mi_bits - pts[a].first) / (pts[b].first - pts[a].first);
  out.post_fec_ser = std::pow(10.0, la + t * (lb - la));
  out.mi_lo = pts[a].first;
  out.mi_hi = pts[b].first;
  out.ser_lo = pts[a].second;
  out.ser_hi = pts[b].second;
  return out;
}

void save_calibration_curve(const CalibrationCurve& curve,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write calibration curve: " + path);
  out << "# nbfec calibration curve (MI in bits/symbol, SER as a rate)\n";
  out << "# code=" << curve.code_id << " target_ser="
      << format_double(curve.target_ser) << " seed=" << curve.seed << " kind="
      << (curve.kind == LinkKind::awgn ? "soft" : "hard") << "\n";
  out << "# threshold_mi_bits=" << format_double(curve.threshold_mi_bits) << "\n";
  out << "mi_bits,post_fec_ser\n";
  for (const CalibrationPoint& p : curve.points) {
    out << format_double(p.mi_bits) << "," << format_double(p.post_fec_ser)
        << "\n";
  }
}

CalibrationCurve load_calibration_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open calibration curve: " + path);
  CalibrationCurve curve;
  curve.threshold_mi_bits = kNan;
  bool header_seen = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
          if (key == "code") curve.code_id = val;
          else if (key == "target_ser") curve.target_ser = std::stod(val);
          else if (key == "seed") curve.seed = std::stoull(val);
          else if (key == "threshold_mi_bits") curve.threshold_mi_bits = std::stod(val);
          else if (key == "kind") {
            curve.kind = val == "hard" ? LinkKind::awgn_hard : LinkKind::awgn;
          }
        } catch (const std::exception&) {
          throw FormatError(path + ": bad metadata value in '" + tok + "'");
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "mi_bits,post_fec_ser") {
        throw FormatError(path + ": expected header 'mi_bits,post_fec_ser'");
      }
      header_seen = true;
      continue;
    }
    CalibrationPoint p;
    std::istringstream ss(line);
    char comma = 0;
    if (!(ss >> p.mi_bits >> comma >> p.post_fec_ser) || comma != ',') {
      throw FormatError(path + ": bad curve row '" + line + "'");
    }
    curve.points.push_back(p);
  }
  if (!header_seen) throw FormatError(path + ": missing curve header");
  if (curve.points.empty()) throw FormatError(path + ": curve has no points");
  return curve;
}

DecodeDbResult decode_db_post_fec(const MeasurementDb& db,
                                  const Constellation& c, const QcCode& code,
                                  uint64_t seed, const SimOptions& opts) {
  if (db.size() < code.n) {
    throw InputError("decode_db: db holds " + std::to_string(db.size()) +
                     " records, need at least one block of " +
                     std::to_string(code.n));
  }
  if (db.alphabet != c.size() || c.size() != code.gf.size()) {
    throw InputError("decode_db: alphabet mismatch between db, constellation, code");
  }
  const size_t M = c.size();
  const size_t n = code.n;
  const size_t frames = db.size() / n;

  // variance off the recording itself, then the matched-form metric
  INbOptions mopts;
  mopts.workers = opts.workers;
  INbResult est = estimate_i_nb(db, c, GaussianMetric{0.5}, mopts);
  if (!(est.sigma2_hat > 0.0) || !std::isfinite(est.sigma2_hat)) {
    throw InputError("decode_db: variance estimate degenerate, cannot build metric");
  }
  DecodeDbResult res;
  res.sigma2_hat = est.sigma2_hat;
  res.i_nb_bits = est.i_nb_bits;
  DecodingMetric metric = GaussianMetric{est.sigma2_hat};

  std::vector<uint32_t> perm(frames * n);
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<uint32_t>(i);
  Rng prng(derive_seed(seed, 0x1e));
  for (size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[prng.below(static_cast<uint32_t>(i + 1))]);
  }

  std::vector<long long> frame_err(frames, 0);
  parallel_for(frames, opts.workers, [&](size_t f) {
    std::vector<uint8_t> coset =
        encode(code, random_block_info(code, derive_seed(seed, 0x200 + f)));
    std::vector<double> llrs(n * (M - 1));
    std::vector<double> full(M);
    for (size_t k = 0; k < n; ++k) {
      size_t rec = perm[f * n + k];
      full[0] = 0.0;
      symbol_llrs(db.rx[rec], c, metric, full.data() + 1);
      uint8_t g = static_cast<uint8_t>(db.tx[rec] ^ coset[k]);
      double base = full[g];
      for (size_t a = 1; a < M; ++a) {
        llrs[k * (M - 1) + a - 1] = full[a ^ g] - base;
      }
    }
    LayeredDecoder dec(code);
    DecodeResult dr = dec.decode(llrs, opts.max_iters, opts.rule);
    long long errs = 0;
    for (size_t k = 0; k < n; ++k) {
      if (dr.symbols[k] != coset[k]) ++errs;
    }
    frame_err[f] = errs;
  });

  res.frames = static_cast<long long>(frames);
  for (long long e : frame_err) {
    res.symbol_errors += e;
    if (e > 0) ++res.frame_errors;
  }
  res.post_fec_ser =
      static_cast<double>(res.symbol_errors) / (static_cast<double>(frames) * n);
  res.fer = static_cast<double>(res.frame_errors) / static_cast<double>(frames);
  return res;
}

UniversalityResult universality_sweep(const QcCode& code, const ChannelMix& mix,
                                      std::span<const double> gammas,
                                      const SimOptions& opts, double mi_tol) {
  if (gammas.empty()) throw ConfigError("universality: no gamma values");
  auto end_mi = [&](const MixEnd& end, uint64_t tag) {
    if (!end.constellation) {
      throw ConfigError("universality: both ends need a constellation");
    }
    if (end.kind == LinkKind::awgn) {
      return mi_sd_numeric(*end.constellation, end.sigma2);
    }
    DmcMatrix w = estimate_dmc(*end.constellation, end.sigma2,
                               opts.dmc_samples_per_symbol,
                               derive_seed(opts.seed, tag));
    return mi_hd(w, end.constellation->priors);
  };

  UniversalityResult res;
  res.mi1_bits = end_mi(mix.ch1, 0xa1);
  res.mi2_bits = end_mi(mix.ch2, 0xa2);
  if (std::abs(res.mi1_bits - res.mi2_bits) > mi_tol) {
    std::ostringstream msg;
    msg << "universality: end MIs differ by "
        << std::abs(res.mi1_bits - res.mi2_bits) << " bits ("
        << res.mi1_bits << " vs " << res.mi2_bits << "), tolerance " << mi_tol;
    throw ConfigError(msg.str());
  }

  for (double g : gammas) {
    if (g < 0.0 || g > 1.0) throw ConfigError("universality: gamma outside [0, 1]");
    MixPointResult r = run_mix_point(code, mix, g, opts);
    res.entries.push_back(
        {r.gamma, r.blocks, r.post_fec_ser, r.post_fec_ser_se, r.fer});
  }
  double mean = 0.0;
  for (const auto& e : res.entries) mean += e.post_fec_ser;
  mean /= static_cast<double>(res.entries.size());
  for (const auto& e : res.entries) {
    res.max_abs_dev = std::max(res.max_abs_dev, std::abs(e.post_fec_ser - mean));
  }
  return res;
}

}  // namespace nbfec
