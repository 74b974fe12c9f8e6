#include "doctest.h"

#include "nbfec/errors.hpp"
#include "nbfec/gf.hpp"

using nbfec::GfTables;

TEST_CASE("field sizes and range checks") {
  CHECK(GfTables(3).size() == 8);
  CHECK(GfTables(1).size() == 2);
  CHECK(GfTables(8).size() == 256);
  CHECK_THROWS_AS(GfTables(0), nbfec::ConfigError);
  CHECK_THROWS_AS(GfTables(9), nbfec::ConfigError);
}

TEST_CASE("field axioms hold exhaustively for m <= 4") {
  for (int m = 1; m <= 4; ++m) {
    GfTables gf(m);
    int M = static_cast<int>(gf.size());
    for (int a = 0; a < M; ++a) {
      CHECK(gf.add(a, a) == 0);  // characteristic 2
      CHECK(gf.mul(a, 1) == a);
      CHECK(gf.mul(a, 0) == 0);
      for (int b = 0; b < M; ++b) {
        CHECK(gf.mul(a, b) == gf.mul(b, a));
        CHECK(gf.add(a, b) == gf.add(b, a));
        for (int c = 0; c < M; ++c) {
          CHECK(gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c)));
          CHECK(gf.mul(a, gf.add(b, c)) ==
                gf.add(gf.mul(a, b), gf.mul(a, c)));
        }
      }
    }
  }
}

TEST_CASE("every nonzero element has a unique inverse") {
  for (int m : {1, 2, 3, 4, 8}) {
    GfTables gf(m);
    int M = static_cast<int>(gf.size());
    for (int a = 1; a < M; ++a) {
      CHECK(gf.mul(a, gf.inv(a)) == 1);
      int count = 0;
      for (int b = 1; b < M; ++b)
        if (gf.mul(a, b) == 1) ++count;
      CHECK(count == 1);
    }
  }
}

TEST_CASE("primitive element has full multiplicative order") {
  // brute force with repeated mul, independent of the exp/log tables
  for (int m = 1; m <= 8; ++m) {
    GfTables gf(m);
    uint32_t M = gf.size();
    uint8_t alpha = gf.alpha_pow(1);
    uint8_t p = 1;
    for (uint32_t k = 1; k < M - 1; ++k) {
      p = gf.mul(p, alpha);
      CHECK(p != 1);
      CHECK(p == gf.alpha_pow(k));
    }
    CHECK(gf.mul(p, alpha) == 1);  // alpha^(M-1) = 1
  }
}

TEST_CASE("GF(8) uses x^3 + x + 1") {
  GfTables gf(3);
  CHECK(gf.primitive_poly() == 0b1011);
  // alpha = x (binary 010): alpha^3 = alpha + 1 under this polynomial
  CHECK(gf.alpha_pow(1) == 2);
  CHECK(gf.alpha_pow(3) == gf.add(2, 1));
}

TEST_CASE("mul_row matches mul") {
  GfTables gf(3);
  for (int a = 0; a < 8; ++a) {
    const uint8_t* row = gf.mul_row(static_cast<uint8_t>(a));
    for (int b = 0; b < 8; ++b) CHECK(row[b] == gf.mul(a, b));
  }
}
