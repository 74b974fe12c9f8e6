#include "nbfec/measurement_db.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nbfec/csv.hpp"
#include "nbfec/errors.hpp"

namespace nbfec {

MeasurementDb load_measurement_db(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open measurement db: " + path);

  MeasurementDb db;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");

  // Required header: # constellation=<name> M=<int> N=<int>
  size_t expect_n = 0;
  {
    std::istringstream ss(line);
    std::string hash, tok;
    ss >> hash;
    if (hash != "#") throw FormatError(path + ": missing '# constellation=...' header");
    bool have_c = false, have_m = false, have_n = false;
    while (ss >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "constellation") {
        db.constellation_name = val;
        have_c = true;
      } else if (key == "M") {
        db.alphabet = std::stoul(val);
        have_m = true;
      } else if (key == "N") {
        expect_n = std::stoul(val);
        have_n = true;
      }
    }
    if (!have_c || !have_m || !have_n) {
      throw FormatError(path + ": header must carry constellation=, M= and N=");
    }
  }
  if (db.alphabet < 2 || db.alphabet > 256) {
    throw FormatError(path + ": M out of range");
  }

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      auto eq = line.find("esn0_db=");
      if (eq != std::string::npos) db.esn0_db = std::stod(line.substr(eq + 8));
      continue;
    }
    unsigned long tx;
    double re, im;
    if (std::sscanf(line.c_str(), "%lu,%lf,%lf", &tx, &re, &im) != 3) {
      throw FormatError(path + ": bad record '" + line + "'");
    }
    if (tx >= db.alphabet) {
      throw FormatError(path + ": tx index " + std::to_string(tx) + " >= M");
    }
    db.tx.push_back(static_cast<uint8_t>(tx));
    db.rx.emplace_back(re, im);
  }
  if (db.tx.empty()) throw FormatError(path + ": no records");
  if (db.tx.size() != expect_n) {
    throw FormatError(path + ": header says N=" + std::to_string(expect_n) +
                      " but found " + std::to_string(db.tx.size()) + " records");
  }
  return db;
}

void save_measurement_db(const MeasurementDb& db, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write measurement db: " + path);
  out << "# constellation=" << db.constellation_name << " M=" << db.alphabet
      << " N=" << db.size() << "\n";
  if (db.esn0_db) out << "# esn0_db=" << format_double(*db.esn0_db) << "\n";
  std::string row;
  for (size_t i = 0; i < db.size(); ++i) {
    row.clear();
    row += std::to_string(static_cast<unsigned>(db.tx[i]));
    row += ',';
    row += format_double(db.rx[i].real());
    row += ',';
    row += format_double(db.rx[i].imag());
    row += '\n';
    out << row;
  }
}

}  // namespace nbfec
