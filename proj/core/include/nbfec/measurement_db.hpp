#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nbfec {

// A recorded transmission: transmitted symbol indices with the matching
// received coordinates. CSV on disk:
//   # constellation=<name> M=<int> N=<int>
//   # esn0_db=<float>            (optional metadata)
//   tx_index,rx_i,rx_q           (N rows)
struct MeasurementDb {
  std::string constellation_name;
  size_t alphabet = 0;  // M
  std::vector<uint8_t> tx;
  std::vector<std::complex<double>> rx;
  std::optional<double> esn0_db;

  size_t size() const { return tx.size(); }
};

MeasurementDb load_measurement_db(const std::string& path);
void save_measurement_db(const MeasurementDb& db, const std::string& path);

}  // namespace nbfec
