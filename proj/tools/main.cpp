// nbfec: simulation and analysis front end for nonbinary FEC coded
// modulation. Subcommands cover Monte Carlo sweeps, MI threshold
// calibration, measurement database analysis, post-FEC prediction from a
// calibrated curve, coset decoding of recorded data, the gamma mixing
// experiment, and hard-decision DMC tables.

#include <bit>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nbfec/csv.hpp"
#include "nbfec/errors.hpp"
#include "nbfec/predict.hpp"
#include "nbfec/rng.hpp"

using nbfec::format_double;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<double> parse_grid(const std::string& spec, const char* what) {
  // "a:b:c" start:step:stop inclusive, or a single value
  std::vector<double> out;
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(spec);
  while (std::getline(ss, cur, ':')) parts.push_back(cur);
  try {
    if (parts.size() == 1) {
      out.push_back(std::stod(parts[0]));
      return out;
    }
    if (parts.size() != 3) throw std::invalid_argument("shape");
    double a = std::stod(parts[0]), b = std::stod(parts[1]), c = std::stod(parts[2]);
    if (b <= 0.0) throw std::invalid_argument("step");
    for (double v = a; v <= c + 1e-9; v += b) out.push_back(v);
    if (out.empty()) throw std::invalid_argument("empty");
    return out;
  } catch (const std::exception&) {
    throw nbfec::ConfigError(std::string(what) +
                             ": expected 'value' or 'start:step:stop' with a "
                             "positive step, got '" + spec + "'");
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

int default_workers() {
  if (const char* env = std::getenv("NBFEC_WORKERS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const ordered_json& config,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::string>& failures) {
  ordered_json m;
  m["tool"] = "nbfec";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["outputs"] = outputs;
  m["failures"] = failures;
  std::ofstream f(out_path + ".manifest.json");
  if (!f) throw nbfec::InputError("cannot write manifest next to " + out_path);
  f << m.dump(2) << "\n";
}

// shared flag bundle
struct Common {
  std::string constellation = "c3";
  std::string code = "0.8";
  int circulant = 100;
  uint64_t code_seed = 1;
  uint64_t seed = 1;
  int workers = default_workers();
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_code) {
  cmd->add_option("--constellation", c.constellation,
                  "Constellation file or built-in name (c1, c2, c3/8psk, c4/ring7, qpsk)");
  if (needs_code) {
    cmd->add_option("--code", c.code, "Code preset file or rate (0.7, 0.75, 0.8, 0.85, 0.9)");
    cmd->add_option("--circulant", c.circulant, "Circulant size for rate presets")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--code-seed", c.code_seed, "Construction seed for rate presets");
  }
  cmd->add_option("--seed", c.seed, "Run seed; everything stochastic derives from it");
  cmd->add_option("--workers", c.workers, "Worker threads (default $NBFEC_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output CSV path")->required();
}

struct SimFlags {
  int max_blocks = 400;
  int target_block_errors = 20;
  int target_symbol_errors = 100;
  int max_iters = 15;
  bool min_sum = false;
  double metric_k = std::numeric_limits<double>::quiet_NaN();
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--max-blocks", f.max_blocks, "Block cap per sweep point");
  cmd->add_option("--target-block-errors", f.target_block_errors,
                  "Stop a point once this many blocks failed");
  cmd->add_option("--target-symbol-errors", f.target_symbol_errors,
                  "...and at least this many symbol errors accumulated");
  cmd->add_option("--max-iters", f.max_iters, "Decoder iteration cap");
  cmd->add_flag("--min-sum", f.min_sum, "Max-log check node rule instead of exact");
  cmd->add_option("--metric-k", f.metric_k,
                  "Assumed Gaussian metric variance per real dimension "
                  "(default: true channel sigma^2)");
}

nbfec::SimOptions to_sim_options(const Common& c, const SimFlags& f) {
  nbfec::SimOptions o;
  o.seed = c.seed;
  o.workers = c.workers;
  o.max_blocks = f.max_blocks;
  o.target_block_errors = f.target_block_errors;
  o.target_symbol_errors = f.target_symbol_errors;
  o.max_iters = f.max_iters;
  o.rule = f.min_sum ? nbfec::CheckRule::min_sum : nbfec::CheckRule::exact;
  o.metric_k = f.metric_k;
  return o;
}

ordered_json sim_config(const Common& c, const SimFlags& f) {
  ordered_json j;
  j["constellation"] = c.constellation;
  j["code"] = c.code;
  j["circulant"] = c.circulant;
  j["code_seed"] = c.code_seed;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["max_blocks"] = f.max_blocks;
  j["target_block_errors"] = f.target_block_errors;
  j["target_symbol_errors"] = f.target_symbol_errors;
  j["max_iters"] = f.max_iters;
  j["check_rule"] = f.min_sum ? "min_sum" : "exact";
  if (!std::isnan(f.metric_k)) j["metric_k"] = f.metric_k;
  return j;
}

// ---- subcommand runners ---------------------------------------------------

int run_simulate(const Common& com, const SimFlags& sf, const std::string& esn0,
                 bool hard) {
  auto grid = parse_grid(esn0, "--esn0");
  nbfec::Constellation c = nbfec::resolve_constellation(com.constellation);
  nbfec::QcCode code = nbfec::resolve_code(com.code, com.circulant, com.code_seed);
  nbfec::SimOptions opts = to_sim_options(com, sf);
  nbfec::LinkKind kind = hard ? nbfec::LinkKind::awgn_hard : nbfec::LinkKind::awgn;

  std::ofstream out(com.out);
  if (!out) throw nbfec::InputError("cannot write " + com.out);
  out << "# nbfec simulate: code=" << code.id << " constellation=" << c.name
      << " link=" << (hard ? "hard" : "soft") << " seed=" << com.seed << "\n";
  out << "# esn0_db in dB; mi_sd/i_nb/aclb/gmi/i_hd in bits/symbol; "
         "ber/ser/fer are rates; sigma2 per real dimension\n";
  out << "esn0_db,sigma2,mi_sd_bits,i_hd_bits,i_nb_bits,nu_hat,sigma2_hat,"
         "i_nb_stderr_bits,aclb_bits,gmi_bits,pre_fec_ber,pre_fec_ser,"
         "post_fec_ser,post_fec_ber,fer,avg_iterations,blocks,db_records\n";

  std::vector<std::string> failures;
  for (double e : grid) {
    try {
      nbfec::PointResult r = nbfec::run_point(code, c, kind, e, opts);
      out << format_double(r.esn0_db) << "," << format_double(r.sigma2) << ","
          << format_double(r.mi_sd_bits) << "," << format_double(r.i_hd_bits)
          << "," << format_double(r.metrics.i_nb_bits) << ","
          << format_double(r.metrics.nu_hat) << ","
          << format_double(r.metrics.sigma2_hat) << ","
          << format_double(r.metrics.i_nb_stderr_bits) << ","
          << format_double(r.metrics.aclb_bits) << ","
          << format_double(r.metrics.gmi_bits) << ","
          << format_double(r.metrics.pre_fec_ber) << ","
          << format_double(r.metrics.pre_fec_ser) << ","
          << format_double(r.post_fec_ser) << ","
          << format_double(r.post_fec_ber) << "," << format_double(r.fer) << ","
          << format_double(r.avg_iterations) << "," << r.blocks << ","
          << r.db_records << "\n";
    } catch (const std::exception& ex) {
      failures.push_back("esn0=" + format_double(e) + ": " + ex.what());
    }
  }
  out.close();

  ordered_json cfg = sim_config(com, sf);
  cfg["esn0"] = esn0;
  cfg["link"] = hard ? "hard" : "soft";
  write_manifest(com.out, "simulate", cfg, {com.out}, failures);
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "simulate: failed point " << f << "\n";
    return 1;
  }
  return 0;
}

int run_calibrate(const Common& com, const SimFlags& sf, const std::string& esn0,
                  bool hard, double target_ser, double refine_gap, int max_refine) {
  auto grid = parse_grid(esn0, "--esn0");
  std::vector<nbfec::Constellation> owned;
  for (const std::string& name : split_commas(com.constellation)) {
    owned.push_back(nbfec::resolve_constellation(name));
  }
  std::vector<const nbfec::Constellation*> cs;
  for (const auto& c : owned) cs.push_back(&c);

  nbfec::QcCode code = nbfec::resolve_code(com.code, com.circulant, com.code_seed);
  nbfec::CalibrateOptions opts;
  opts.sim = to_sim_options(com, sf);
  opts.refine_mi_gap = refine_gap;
  opts.max_refine = max_refine;

  nbfec::LinkKind kind = hard ? nbfec::LinkKind::awgn_hard : nbfec::LinkKind::awgn;
  nbfec::CalibrationCurve curve =
      nbfec::calibrate(code, cs, kind, target_ser, grid, opts);
  nbfec::save_calibration_curve(curve, com.out);

  std::cout << "threshold_mi_bits=" << format_double(curve.threshold_mi_bits)
            << " code=" << curve.code_id << " target_ser="
            << format_double(target_ser) << "\n";

  ordered_json cfg = sim_config(com, sf);
  cfg["esn0"] = esn0;
  cfg["link"] = hard ? "hard" : "soft";
  cfg["target_ser"] = target_ser;
  cfg["refine_gap"] = refine_gap;
  cfg["max_refine"] = max_refine;
  write_manifest(com.out, "calibrate", cfg, {com.out}, {});
  return 0;
}

int run_analyze(const Common& com, const std::string& db_path, double metric_k) {
  nbfec::MeasurementDb db = nbfec::load_measurement_db(db_path);
  nbfec::Constellation c = nbfec::resolve_constellation(com.constellation);
  nbfec::INbOptions opts;
  opts.workers = com.workers;
  nbfec::MetricReport rep = nbfec::analyze(db, c, nbfec::GaussianMetric{metric_k}, opts);

  std::ofstream out(com.out);
  if (!out) throw nbfec::InputError("cannot write " + com.out);
  out << "# nbfec analyze: db=" << db_path << " constellation=" << c.name
      << " metric_k=" << format_double(metric_k) << "\n";
  out << "# *_bits in bits/symbol; sigma2_hat per real dimension; ber/ser are rates\n";
  out << "metric,value\n";
  out << "i_nb_bits," << format_double(rep.i_nb_bits) << "\n";
  out << "nu_hat," << format_double(rep.nu_hat) << "\n";
  out << "sigma2_hat," << format_double(rep.sigma2_hat) << "\n";
  out << "i_nb_stderr_bits," << format_double(rep.i_nb_stderr_bits) << "\n";
  out << "aclb_bits," << format_double(rep.aclb_bits) << "\n";
  out << "gmi_bits," << format_double(rep.gmi_bits) << "\n";
  out << "pre_fec_ber," << format_double(rep.pre_fec_ber) << "\n";
  out << "pre_fec_ser," << format_double(rep.pre_fec_ser) << "\n";
  out << "n_records," << rep.n_records << "\n";
  for (const std::string& w : rep.warnings) out << "warning," << w << "\n";
  out.close();

  ordered_json cfg;
  cfg["db"] = db_path;
  cfg["constellation"] = com.constellation;
  cfg["metric_k"] = metric_k;
  cfg["workers"] = com.workers;
  write_manifest(com.out, "analyze", cfg, {com.out}, {});
  return 0;
}

int run_predict(const Common& com, const std::string& curve_path,
                double mi_bits, const std::string& db_path, double metric_k) {
  nbfec::CalibrationCurve curve = nbfec::load_calibration_curve(curve_path);
  double mi = mi_bits;
  double i_nb_stderr = 0.0;
  if (!db_path.empty()) {
    nbfec::MeasurementDb db = nbfec::load_measurement_db(db_path);
    nbfec::Constellation c = nbfec::resolve_constellation(com.constellation);
    nbfec::INbOptions opts;
    opts.workers = com.workers;
    nbfec::INbResult est =
        nbfec::estimate_i_nb(db, c, nbfec::GaussianMetric{metric_k}, opts);
    mi = est.i_nb_bits;
    i_nb_stderr = est.stderr_bits;
  } else if (std::isnan(mi)) {
    throw nbfec::ConfigError("predict: give either --mi or --db");
  }

  nbfec::Prediction p = nbfec::predict_post_fec(mi, curve);
  std::ofstream out(com.out);
  if (!out) throw nbfec::InputError("cannot write " + com.out);
  out << "# nbfec predict: curve=" << curve_path << " code=" << curve.code_id
      << " threshold_mi_bits=" << format_double(curve.threshold_mi_bits) << "\n";
  out << "# mi in bits/symbol; post_fec_ser is a rate; extrapolated=1 means "
         "mi lies outside the calibrated range\n";
  out << "mi_bits,i_nb_stderr_bits,post_fec_ser,mi_lo,mi_hi,ser_lo,ser_hi,extrapolated\n";
  out << format_double(mi) << "," << format_double(i_nb_stderr) << ","
      << format_double(p.post_fec_ser) << "," << format_double(p.mi_lo) << ","
      << format_double(p.mi_hi) << "," << format_double(p.ser_lo) << ","
      << format_double(p.ser_hi) << "," << (p.extrapolated ? 1 : 0) << "\n";
  out.close();

  std::cout << "post_fec_ser=" << format_double(p.post_fec_ser)
            << (p.extrapolated ? " (extrapolated)" : "") << "\n";

  ordered_json cfg;
  cfg["curve"] = curve_path;
  if (!std::isnan(mi_bits)) cfg["mi"] = mi_bits;
  if (!db_path.empty()) {
    cfg["db"] = db_path;
    cfg["constellation"] = com.constellation;
    cfg["metric_k"] = metric_k;
  }
  cfg["workers"] = com.workers;
  write_manifest(com.out, "predict", cfg, {com.out}, {});
  return 0;
}

int run_decode_db(const Common& com, const SimFlags& sf, const std::string& db_path) {
  nbfec::MeasurementDb db = nbfec::load_measurement_db(db_path);
  nbfec::Constellation c = nbfec::resolve_constellation(com.constellation);
  nbfec::QcCode code = nbfec::resolve_code(com.code, com.circulant, com.code_seed);
  nbfec::SimOptions opts = to_sim_options(com, sf);
  nbfec::DecodeDbResult r = nbfec::decode_db_post_fec(db, c, code, com.seed, opts);

  std::ofstream out(com.out);
  if (!out) throw nbfec::InputError("cannot write " + com.out);
  out << "# nbfec decode-db: db=" << db_path << " code=" << code.id
      << " constellation=" << c.name << " seed=" << com.seed << "\n";
  out << "# i_nb in bits/symbol; sigma2_hat per real dimension; ser/fer are rates\n";
  out << "frames,frame_errors,symbol_errors,post_fec_ser,fer,sigma2_hat,i_nb_bits\n";
  out << r.frames << "," << r.frame_errors << "," << r.symbol_errors << ","
      << format_double(r.post_fec_ser) << "," << format_double(r.fer) << ","
      << format_double(r.sigma2_hat) << "," << format_double(r.i_nb_bits) << "\n";
  out.close();

  std::cout << "post_fec_ser=" << format_double(r.post_fec_ser) << " frames="
            << r.frames << "\n";

  ordered_json cfg = sim_config(com, sf);
  cfg["db"] = db_path;
  write_manifest(com.out, "decode-db", cfg, {com.out}, {});
  return 0;
}

// end spec "name:kind:esn0_db", e.g. "c3:soft:9.0"
nbfec::MixEnd parse_end(const std::string& spec, nbfec::Constellation& storage) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(spec);
  while (std::getline(ss, cur, ':')) parts.push_back(cur);
  if (parts.size() != 3) {
    throw nbfec::ConfigError("channel end spec must be name:kind:esn0_db, got '" +
                             spec + "'");
  }
  storage = nbfec::resolve_constellation(parts[0]);
  nbfec::MixEnd end;
  end.constellation = &storage;
  if (parts[1] == "soft") end.kind = nbfec::LinkKind::awgn;
  else if (parts[1] == "hard") end.kind = nbfec::LinkKind::awgn_hard;
  else throw nbfec::ConfigError("channel end kind must be soft or hard");
  end.sigma2 = nbfec::esn0_db_to_sigma2(std::stod(parts[2]));
  return end;
}

int run_universality(const Common& com, const SimFlags& sf,
                     const std::string& ch1, const std::string& ch2,
                     const std::string& gamma_spec, double mi_tol) {
  nbfec::Constellation c1, c2;
  nbfec::ChannelMix mix;
  mix.ch1 = parse_end(ch1, c1);
  mix.ch2 = parse_end(ch2, c2);
  auto gammas = parse_grid(gamma_spec, "--gamma");
  nbfec::QcCode code = nbfec::resolve_code(com.code, com.circulant, com.code_seed);
  nbfec::SimOptions opts = to_sim_options(com, sf);

  nbfec::UniversalityResult r =
      nbfec::universality_sweep(code, mix, gammas, opts, mi_tol);

  std::ofstream out(com.out);
  if (!out) throw nbfec::InputError("cannot write " + com.out);
  out << "# nbfec universality: code=" << code.id << " ch1=" << ch1
      << " ch2=" << ch2 << " seed=" << com.seed << "\n";
  out << "# mi1_bits=" << format_double(r.mi1_bits) << " mi2_bits="
      << format_double(r.mi2_bits) << " max_abs_dev="
      << format_double(r.max_abs_dev) << "\n";
  out << "gamma,blocks,post_fec_ser,post_fec_ser_se,fer\n";
  for (const auto& e : r.entries) {
    out << format_double(e.gamma) << "," << e.blocks << ","
        << format_double(e.post_fec_ser) << ","
        << format_double(e.post_fec_ser_se) << "," << format_double(e.fer)
        << "\n";
  }
  out.close();

  ordered_json cfg = sim_config(com, sf);
  cfg["ch1"] = ch1;
  cfg["ch2"] = ch2;
  cfg["gamma"] = gamma_spec;
  cfg["mi_tol"] = mi_tol;
  write_manifest(com.out, "universality", cfg, {com.out}, {});
  return 0;
}

int run_dmc(const Common& com, const std::string& esn0, size_t samples,
            const std::string& w_prefix) {
  auto grid = parse_grid(esn0, "--esn0");
  nbfec::Constellation c = nbfec::resolve_constellation(com.constellation);

  std::ofstream out(com.out);
  if (!out) throw nbfec::InputError("cannot write " + com.out);
  out << "# nbfec dmc: constellation=" << c.name << " samples_per_symbol="
      << samples << " seed=" << com.seed << "\n";
  out << "# i_hd in bits/symbol; pre_fec_ser is the hard-decision error rate\n";
  out << "esn0_db,i_hd_bits,pre_fec_ser\n";

  std::vector<std::string> outputs{com.out};
  for (double e : grid) {
    double sigma2 = nbfec::esn0_db_to_sigma2(e);
    nbfec::DmcMatrix w = nbfec::estimate_dmc(
        c, sigma2, samples,
        nbfec::derive_seed(com.seed, nbfec::mix64(std::bit_cast<uint64_t>(e))));
    double ser = 0.0;
    for (size_t k = 0; k < c.size(); ++k) {
      ser += c.priors[k] * (1.0 - w.at(k, k));
    }
    out << format_double(e) << "," << format_double(nbfec::mi_hd(w, c.priors))
        << "," << format_double(ser) << "\n";
    if (!w_prefix.empty()) {
      std::string path = w_prefix + format_double(e) + ".csv";
      std::ofstream wf(path);
      if (!wf) throw nbfec::InputError("cannot write " + path);
      wf << "# transition matrix rows: received index j; columns: sent index k\n";
      for (size_t j = 0; j < c.size(); ++j) {
        for (size_t k = 0; k < c.size(); ++k) {
          wf << (k ? "," : "") << format_double(w.at(j, k));
        }
        wf << "\n";
      }
      outputs.push_back(path);
    }
  }
  out.close();

  ordered_json cfg;
  cfg["constellation"] = com.constellation;
  cfg["esn0"] = esn0;
  cfg["samples"] = samples;
  cfg["seed"] = com.seed;
  if (!w_prefix.empty()) cfg["w_prefix"] = w_prefix;
  write_manifest(com.out, "dmc", cfg, outputs, {});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonbinary FEC coded modulation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // simulate
  Common sim_com;
  SimFlags sim_f;
  std::string sim_esn0;
  bool sim_hard = false;
  auto* sim = app.add_subcommand("simulate", "AWGN sweep: metrics and post-FEC error rates");
  add_common(sim, sim_com, true);
  add_sim_flags(sim, sim_f);
  sim->add_option("--esn0", sim_esn0, "Es/N0 grid in dB, start:step:stop")->required();
  sim->add_flag("--hard", sim_hard, "Hard-decision link (DMC receiver)");

  // calibrate
  Common cal_com;
  SimFlags cal_f;
  std::string cal_esn0;
  bool cal_hard = false;
  double cal_target = 1e-3, cal_gap = 0.03;
  int cal_refine = 6;
  auto* cal = app.add_subcommand("calibrate", "MI threshold against a target post-FEC SER");
  add_common(cal, cal_com, true);
  add_sim_flags(cal, cal_f);
  cal->add_option("--esn0", cal_esn0, "Es/N0 grid in dB, start:step:stop")->required();
  cal->add_flag("--hard", cal_hard, "Hard-decision link");
  cal->add_option("--target-ser", cal_target, "Post-FEC SER the threshold refers to");
  cal->add_option("--refine-gap", cal_gap, "Stop refining once the MI bracket is this tight");
  cal->add_option("--max-refine", cal_refine, "Extra bisection points per constellation");

  // analyze
  Common ana_com;
  std::string ana_db;
  double ana_k = 0.5;
  auto* ana = app.add_subcommand("analyze", "Metric report for a measurement database");
  add_common(ana, ana_com, false);
  ana->add_option("--db", ana_db, "Measurement database CSV")->required();
  ana->add_option("--metric-k", ana_k,
                  "Assumed metric variance; 1/2 makes sigma2_hat = 1/(2 nu_hat)");

  // predict
  Common pre_com;
  std::string pre_curve, pre_db;
  double pre_mi = std::numeric_limits<double>::quiet_NaN();
  double pre_k = 0.5;
  auto* pre = app.add_subcommand("predict", "Post-FEC SER from a calibration curve");
  add_common(pre, pre_com, false);
  pre->add_option("--curve", pre_curve, "Calibration curve CSV")->required();
  pre->add_option("--mi", pre_mi, "MI operating point in bits/symbol");
  pre->add_option("--db", pre_db, "Estimate the MI from this database instead");
  pre->add_option("--metric-k", pre_k, "Metric variance for the db estimate");

  // decode-db
  Common dbc_com;
  SimFlags dbc_f;
  std::string dbc_db;
  auto* dbc = app.add_subcommand("decode-db", "Coset-decode a recorded transmission");
  add_common(dbc, dbc_com, true);
  add_sim_flags(dbc, dbc_f);
  dbc->add_option("--db", dbc_db, "Measurement database CSV")->required();

  // universality
  Common uni_com;
  SimFlags uni_f;
  std::string uni_ch1, uni_ch2, uni_gamma = "0:0.25:1";
  double uni_tol = 0.05;
  auto* uni = app.add_subcommand("universality", "Post-FEC SER across a gamma channel mix");
  add_common(uni, uni_com, true);
  add_sim_flags(uni, uni_f);
  uni->add_option("--ch1", uni_ch1, "First end, name:kind:esn0_db (kind soft|hard)")->required();
  uni->add_option("--ch2", uni_ch2, "Second end, same format")->required();
  uni->add_option("--gamma", uni_gamma, "Mixing fractions, start:step:stop");
  uni->add_option("--mi-tol", uni_tol, "Allowed MI mismatch between ends, bits");

  // dmc
  Common dmc_com;
  std::string dmc_esn0;
  size_t dmc_samples = 50000;
  std::string dmc_wprefix;
  auto* dmc = app.add_subcommand("dmc", "Hard-decision channel tables: I_hd and transition matrices");
  add_common(dmc, dmc_com, false);
  dmc->add_option("--esn0", dmc_esn0, "Es/N0 grid in dB, start:step:stop")->required();
  dmc->add_option("--samples", dmc_samples, "Transmissions per symbol for the estimate");
  dmc->add_option("--w-out", dmc_wprefix, "Prefix for per-point transition matrix CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_com, sim_f, sim_esn0, sim_hard);
    if (cal->parsed()) {
      return run_calibrate(cal_com, cal_f, cal_esn0, cal_hard, cal_target,
                           cal_gap, cal_refine);
    }
    if (ana->parsed()) return run_analyze(ana_com, ana_db, ana_k);
    if (pre->parsed()) return run_predict(pre_com, pre_curve, pre_mi, pre_db, pre_k);
    if (dbc->parsed()) return run_decode_db(dbc_com, dbc_f, dbc_db);
    if (uni->parsed()) {
      return run_universality(uni_com, uni_f, uni_ch1, uni_ch2, uni_gamma, uni_tol);
    }
    if (dmc->parsed()) return run_dmc(dmc_com, dmc_esn0, dmc_samples, dmc_wprefix);
  } catch (const std::exception& ex) {
    std::cerr << "nbfec: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
