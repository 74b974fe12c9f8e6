#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nbfec/constellation.hpp"
#include "nbfec/measurement_db.hpp"
#include "nbfec/predict.hpp"
#include "test_util.hpp"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const std::string& dir) {
  std::string out_path = dir + "/stdout.txt";
  std::string err_path = dir + "/stderr.txt";
  std::string cmd = std::string(NBFEC_CLI_PATH) + " " + args + " > " +
                    out_path + " 2> " + err_path;
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("help and bad flags") {
  std::string dir = testutil::scratch_dir("cli_basic");
  CHECK(run_cli("--help", dir).exit_code == 0);
  CHECK(run_cli("simulate --help", dir).exit_code == 0);

  CliResult bad = run_cli("--no-such-flag", dir);
  CHECK(bad.exit_code != 0);
  CHECK(!bad.err.empty());

  CliResult none = run_cli("", dir);
  CHECK(none.exit_code != 0);

  // missing required output path
  CliResult noout = run_cli("simulate --esn0 7.0", dir);
  CHECK(noout.exit_code != 0);
}

TEST_CASE("analyze emits the full metric schema") {
  std::string dir = testutil::scratch_dir("cli_analyze");
  nbfec::Constellation c = nbfec::builtin_constellation("c3");
  nbfec::MeasurementDb db = testutil::make_awgn_db(c, 9.0, 10, 401);
  std::string db_path = dir + "/toy.csv";
  nbfec::save_measurement_db(db, db_path);

  std::string out = dir + "/report.csv";
  CliResult r = run_cli("analyze --db " + db_path + " --out " + out, dir);
  CHECK(r.exit_code == 0);

  std::string report = slurp(out);
  for (const char* key :
       {"i_nb_bits", "nu_hat", "sigma2_hat", "aclb_bits", "gmi_bits",
        "pre_fec_ber", "pre_fec_ser", "n_records"}) {
    INFO(key);
    CHECK(report.find(key) != std::string::npos);
  }
  // 10 records is far below the recommended db size
  CHECK(report.find("warning") != std::string::npos);

  auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["tool"] == "nbfec");
  CHECK(manifest["command"] == "analyze");
  CHECK(manifest["config"].contains("db"));
  CHECK(manifest["config"]["workers"].is_number());
  CHECK(manifest["outputs"].size() >= 1);
}

TEST_CASE("simulate runs are byte identical and self-describing") {
  std::string dir = testutil::scratch_dir("cli_sim");
  std::string base =
      "simulate --constellation c3 --code 0.8 --circulant 20 "
      "--esn0 6.5:0.5:7.5 --max-blocks 8 --target-block-errors 1000000 "
      "--target-symbol-errors 1000000 --seed 5 --out ";
  CliResult a = run_cli(base + dir + "/a.csv", dir);
  CHECK(a.exit_code == 0);
  CliResult b = run_cli(base + dir + "/b.csv", dir);
  CHECK(b.exit_code == 0);

  std::string ca = slurp(dir + "/a.csv");
  CHECK(ca == slurp(dir + "/b.csv"));
  CHECK(!ca.empty());

  // units live in the header comments; one data row per grid point
  CHECK(ca.find("bits/symbol") != std::string::npos);
  CHECK(ca.find("esn0_db") != std::string::npos);
  int rows = 0;
  std::istringstream ss(ca);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#' && line.find("esn0") != 0) ++rows;
  CHECK(rows == 3);

  // manifests differ only in the output path; same config hash otherwise
  auto ma = nlohmann::json::parse(slurp(dir + "/a.csv.manifest.json"));
  auto mb = nlohmann::json::parse(slurp(dir + "/b.csv.manifest.json"));
  ma["config"].erase("out");
  mb["config"].erase("out");
  ma.erase("outputs");
  mb.erase("outputs");
  CHECK(ma == mb);
}

TEST_CASE("failing sweep points are enumerated, not hidden") {
  std::string dir = testutil::scratch_dir("cli_mismatch");
  // a 4-point constellation cannot drive a GF(8) code: every point fails
  CliResult r = run_cli(
      "simulate --constellation qpsk --code 0.8 --circulant 20 --esn0 7.0:1.0:8.0 "
      "--out " + dir + "/x.csv",
      dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("esn0=7") != std::string::npos);
  CHECK(r.err.find("esn0=8") != std::string::npos);

  auto manifest = nlohmann::json::parse(slurp(dir + "/x.csv.manifest.json"));
  CHECK(manifest["failures"].size() == 2);
}

TEST_CASE("dmc tables and hard-decision rates") {
  std::string dir = testutil::scratch_dir("cli_dmc");
  CliResult r = run_cli(
      "dmc --constellation c2 --esn0 8.0:2.0:10.0 --samples 5000 --w-out " +
          dir + "/w_ --out " + dir + "/dmc.csv",
      dir);
  CHECK(r.exit_code == 0);
  std::string csv = slurp(dir + "/dmc.csv");
  CHECK(csv.find("i_hd_bits") != std::string::npos);
  CHECK(csv.find("pre_fec_ser") != std::string::npos);
  CHECK(!slurp(dir + "/w_8.csv").empty());
  CHECK(!slurp(dir + "/w_10.csv").empty());
}

TEST_CASE("predict reads curves and databases") {
  std::string dir = testutil::scratch_dir("cli_predict");

  nbfec::CalibrationCurve curve;
  curve.code_id = "toy";
  curve.target_ser = 1e-3;
  curve.seed = 1;
  nbfec::CalibrationPoint p1;
  p1.mi_bits = 2.5;
  p1.post_fec_ser = 1e-2;
  nbfec::CalibrationPoint p2;
  p2.mi_bits = 2.6;
  p2.post_fec_ser = 1e-4;
  curve.points = {p1, p2};
  curve.threshold_mi_bits = 2.55;
  std::string curve_path = dir + "/curve.csv";
  nbfec::save_calibration_curve(curve, curve_path);

  CliResult r = run_cli("predict --curve " + curve_path + " --mi 2.55 --out " +
                            dir + "/pred.csv",
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(slurp(dir + "/pred.csv").find("post_fec_ser") != std::string::npos);
  CHECK(r.out.find("post_fec_ser=0.001") != std::string::npos);

  // no --mi and no --db must fail
  CliResult miss =
      run_cli("predict --curve " + curve_path + " --out " + dir + "/p2.csv", dir);
  CHECK(miss.exit_code != 0);
}

TEST_CASE("universality sweep over a degenerate mix") {
  std::string dir = testutil::scratch_dir("cli_uni");
  CliResult r = run_cli(
      "universality --code 0.8 --circulant 20 --ch1 c3:soft:7.2 "
      "--ch2 c3:soft:7.2 --gamma 0:0.5:1 --max-blocks 8 "
      "--target-block-errors 1000000 --target-symbol-errors 1000000 --out " +
          dir + "/uni.csv",
      dir);
  CHECK(r.exit_code == 0);
  std::string csv = slurp(dir + "/uni.csv");
  CHECK(csv.find("gamma") != std::string::npos);
  int rows = 0;
  std::istringstream ss(csv);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#' && line.find("gamma") != 0) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("decode-db consumes recorded transmissions") {
  std::string dir = testutil::scratch_dir("cli_decode");
  nbfec::Constellation c = nbfec::builtin_constellation("c3");
  nbfec::MeasurementDb db = testutil::make_awgn_db(c, 40.0, 2100, 403);
  std::string db_path = dir + "/rec.csv";
  nbfec::save_measurement_db(db, db_path);

  CliResult r = run_cli("decode-db --db " + db_path +
                            " --code 0.8 --circulant 20 --out " + dir +
                            "/dec.csv",
                        dir);
  CHECK(r.exit_code == 0);
  std::string csv = slurp(dir + "/dec.csv");
  CHECK(csv.find("post_fec_ser") != std::string::npos);
  CHECK(csv.find("frames") != std::string::npos);
}
