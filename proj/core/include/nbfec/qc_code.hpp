#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nbfec/gf.hpp"

namespace nbfec {

// Regular quasi-cyclic LDPC code over GF(2^m). The binary support is a
// q x q circulant expansion of an (mb x nb) base graph with column weight
// dv and row weight dc; every edge carries independent nonzero field
// coefficients drawn from coeff_seed, per circulant row.
struct QcCodeParams {
  int m = 3;
  int dv = 3;
  int dc = 15;
  int nb = 50;
  int q = 100;
  uint64_t shift_seed = 1;
  uint64_t coeff_seed = 1;
};

struct QcCode {
  int m = 3, dv = 3, dc = 15, nb = 50, mb = 10, q = 100;
  size_t n = 0;          // nb*q code symbols
  size_t rows = 0;       // mb*q parity checks
  size_t k_nominal = 0;  // n - rows
  size_t rank = 0;       // rank of H
  size_t k_eff = 0;      // n - rank; larger than k_nominal if H is deficient
  int girth_at_least = 6;
  uint64_t shift_seed = 0, coeff_seed = 0;
  std::string id;

  GfTables gf;

  struct BaseEdge {
    int row = 0, col = 0, shift = 0;
  };
  std::vector<BaseEdge> edges;            // canonical (column-major) order
  std::vector<std::vector<int>> row_edges;  // per base row, edge indices
  std::vector<uint8_t> coeff;             // edges.size()*q coefficients

  // Precomputed LU factorization of a full-rank column subset of H; the
  // complement of the pivot columns is the information set.
  struct Encoder {
    std::vector<uint8_t> lu;         // rows*rows, column-major per slot
    std::vector<uint32_t> row_perm;
    std::vector<uint32_t> slot_col;  // pivot slot -> H column
    std::vector<uint8_t> inv_diag;
    std::vector<uint32_t> info_cols;  // sorted
  };
  Encoder encoder;

  QcCode() : gf(3) {}
};

QcCode build_code(const QcCodeParams& params);

// Desk-scale presets with dv=3: rates 0.70, 0.75, 0.80, 0.85, 0.90 map to
// dc 10, 12, 15, 20, 30. q=100 gives block lengths around 5000 symbols.
QcCode build_rate_preset(double rate, int q = 100, uint64_t seed = 1);

void save_code_preset(const QcCode& code, const std::string& path);
QcCode load_code_preset(const std::string& path);

// Resolves either a preset file path or a rate spec like "0.8" / "r0.8".
QcCode resolve_code(const std::string& spec, int q = 100, uint64_t seed = 1);

// Systematic encoding: info symbols land on the information set, parity
// symbols solve H c = 0. info.size() must equal code.k_eff.
std::vector<uint8_t> encode(const QcCode& code, std::span<const uint8_t> info);

std::vector<uint8_t> syndrome(const QcCode& code, std::span<const uint8_t> cw);
bool syndrome_zero(const QcCode& code, std::span<const uint8_t> cw);

}  // namespace nbfec
