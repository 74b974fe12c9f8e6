#pragma once

#include <cstdint>
#include <vector>

namespace nbfec {

// Arithmetic tables for GF(2^m), 1 <= m <= 8. Elements are stored as
// integers 0 .. 2^m-1 in polynomial representation, so addition is XOR.
// Multiplication goes through log/antilog tables built from a fixed
// primitive polynomial per m (the lexicographically smallest one), which
// keeps every code construction reproducible across builds.
class GfTables {
 public:
  explicit GfTables(int m);

  int m() const { return m_; }
  uint32_t size() const { return size_; }  // 2^m
  uint32_t primitive_poly() const { return poly_; }

  uint8_t add(uint8_t a, uint8_t b) const { return a ^ b; }

  uint8_t mul(uint8_t a, uint8_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];  // exp_ table is doubled, no modulo
  }

  uint8_t inv(uint8_t a) const;

  // alpha^k for k >= 0 (alpha = the root of the primitive polynomial).
  uint8_t alpha_pow(uint32_t k) const { return exp_[k % (size_ - 1)]; }

  // Row a of the full multiplication table; hot loops index it directly.
  const uint8_t* mul_row(uint8_t a) const { return &multab_[size_t{a} * size_]; }

 private:
  int m_;
  uint32_t size_;
  uint32_t poly_;
  std::vector<uint8_t> log_;    // log_[a] for a != 0
  std::vector<uint8_t> exp_;    // 2*(size-1) entries to skip the modulo in mul
  std::vector<uint8_t> multab_; // size*size products
};

}  // namespace nbfec
