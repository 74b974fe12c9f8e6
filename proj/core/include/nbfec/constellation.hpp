#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nbfec {

// A 2-D constellation of M = 2^m points with unit average energy under its
// prior distribution. The position of a point in the list is the symbol
// index used by the mapper; the bit label attached to each point is only
// consulted by bit-level metrics (GMI, pre-FEC BER).
struct Constellation {
  std::string name;
  int m = 0;  // bits per symbol
  std::vector<std::complex<double>> points;
  std::vector<uint16_t> labels;  // m-bit pattern per point
  std::vector<double> priors;

  size_t size() const { return points.size(); }

  // Bit `bit` (0 = most significant) of point i's label.
  int label_bit(size_t i, int bit) const {
    return (labels[i] >> (m - 1 - bit)) & 1;
  }
};

// Text format:
//   first non-comment line:  M D      (D must be 2)
//   then M lines:            label_bits re im [prior]
// '#' starts a comment, labels are bit strings MSB first, priors default
// to 1/M. Points are rescaled to unit average energy on load.
Constellation load_constellation(std::istream& in, const std::string& name);
Constellation load_constellation_file(const std::string& path);

// Built-in geometries: c1 (rectangular 2x4 grid), c2 (two-ring 4+4 star),
// c3 / 8psk (circular), c4 / ring7 (7-point ring plus center), qpsk.
Constellation builtin_constellation(const std::string& name);

// Loads `spec` as a file if one exists at that path, otherwise as a
// built-in name.
Constellation resolve_constellation(const std::string& spec);

std::vector<std::complex<double>> map_symbols(std::span<const uint8_t> symbols,
                                              const Constellation& c);

}  // namespace nbfec
