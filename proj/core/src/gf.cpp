#include "nbfec/gf.hpp"

#include <string>

#include "nbfec/errors.hpp"

namespace nbfec {
namespace {

// Lexicographically smallest primitive polynomial of each degree,
// coefficient of x^i in bit i.
constexpr uint32_t kPrimitivePoly[9] = {
    0,
    0x3,    // x + 1
    0x7,    // x^2 + x + 1
    0xb,    // x^3 + x + 1
    0x13,   // x^4 + x + 1
    0x25,   // x^5 + x^2 + 1
    0x43,   // x^6 + x + 1
    0x83,   // x^7 + x + 1
    0x11d,  // x^8 + x^4 + x^3 + x^2 + 1
};

}  // namespace

GfTables::GfTables(int m) : m_(m) {
  if (m < 1 || m > 8) {
    throw ConfigError("GF(2^m): m must be in [1, 8], got " + std::to_string(m));
  }
  size_ = 1u << m;
  poly_ = kPrimitivePoly[m];
  log_.assign(size_, 0);
  exp_.assign(2 * (size_ - 1), 0);

  // Walk the powers of alpha = x; multiplying by x is a shift plus a
  // conditional reduction by the primitive polynomial.
  uint32_t v = 1;
  for (uint32_t k = 0; k < size_ - 1; ++k) {
    if (k > 0 && v == 1) {
      throw ConfigError("GF(2^m): generator has short order, polynomial not primitive");
    }
    exp_[k] = static_cast<uint8_t>(v);
    exp_[k + size_ - 1] = static_cast<uint8_t>(v);
    log_[v] = static_cast<uint8_t>(k);
    v <<= 1;
    if (v & size_) v ^= poly_;
  }
  if (v != 1) {
    throw ConfigError("GF(2^m): alpha^(2^m-1) != 1, table construction failed");
  }

  multab_.assign(size_t{size_} * size_, 0);
  for (uint32_t a = 1; a < size_; ++a) {
    for (uint32_t b = 1; b < size_; ++b) {
      multab_[size_t{a} * size_ + b] = exp_[log_[a] + log_[b]];
    }
  }
}

uint8_t GfTables::inv(uint8_t a) const {
  if (a == 0) throw InputError("GF(2^m): inverse of 0 is undefined");
  return exp_[(size_ - 1 - log_[a]) % (size_ - 1)];
}

}  // namespace nbfec
