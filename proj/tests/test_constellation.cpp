#include "doctest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>

#include "nbfec/channel.hpp"
#include "nbfec/constellation.hpp"
#include "nbfec/errors.hpp"
#include "nbfec/rng.hpp"
#include "nbfec/sim.hpp"
#include "test_util.hpp"

using namespace nbfec;

namespace {

double avg_energy(const Constellation& c) {
  double e = 0.0;
  for (size_t i = 0; i < c.size(); ++i) e += c.priors[i] * std::norm(c.points[i]);
  return e;
}

Constellation from_text(const std::string& text, const std::string& name = "t") {
  std::istringstream ss(text);
  return load_constellation(ss, name);
}

}  // namespace

TEST_CASE("built-ins are normalized bijectively labeled sets") {
  for (const char* name : {"c1", "c2", "c3", "c4", "qpsk"}) {
    Constellation c = builtin_constellation(name);
    size_t M = std::string(name) == "qpsk" ? 4 : 8;
    CHECK(c.size() == M);
    CHECK(c.m == (M == 4 ? 2 : 3));
    CHECK(avg_energy(c) == doctest::Approx(1.0).epsilon(1e-12));
    std::set<uint16_t> labels(c.labels.begin(), c.labels.end());
    CHECK(labels.size() == M);
    for (size_t i = 0; i < M; ++i)
      for (size_t j = i + 1; j < M; ++j) CHECK(c.points[i] != c.points[j]);
  }
  CHECK(builtin_constellation("8psk").points == builtin_constellation("c3").points);
  CHECK(builtin_constellation("ring7").points == builtin_constellation("c4").points);
  CHECK_THROWS_AS(builtin_constellation("c9"), ConfigError);
}

TEST_CASE("c3 is circular and c4 has a center point") {
  Constellation c3 = builtin_constellation("c3");
  for (const auto& p : c3.points) CHECK(std::abs(p) == doctest::Approx(1.0));
  Constellation c4 = builtin_constellation("c4");
  int at_origin = 0;
  for (const auto& p : c4.points)
    if (std::abs(p) < 1e-12) ++at_origin;
  CHECK(at_origin == 1);
}

TEST_CASE("qpsk labeling is Gray") {
  Constellation c = builtin_constellation("qpsk");
  std::vector<size_t> order(c.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::arg(c.points[a]) < std::arg(c.points[b]);
  });
  for (size_t i = 0; i < order.size(); ++i) {
    uint16_t a = c.labels[order[i]];
    uint16_t b = c.labels[order[(i + 1) % order.size()]];
    CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
  }
}

TEST_CASE("loader accepts priors and comments") {
  Constellation c = from_text(
      "# a shaped 4 point set\n"
      "4 2\n"
      "00  1  1  0.4\n"
      "01 -1  1  0.3\n"
      "11 -1 -1  0.2\n"
      "10  1 -1  0.1  # trailing comment\n");
  CHECK(c.size() == 4);
  CHECK(c.priors[0] == doctest::Approx(0.4));
  CHECK(avg_energy(c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loader rejects malformed specs") {
  // duplicate point
  CHECK_THROWS_AS(from_text("2 2\n0 1 0\n1 1 0\n"), FormatError);
  // duplicate label
  CHECK_THROWS_AS(from_text("2 2\n0 1 0\n0 -1 0\n"), FormatError);
  // priors off by more than 1e-9
  CHECK_THROWS_AS(from_text("2 2\n0 1 0 0.6\n1 -1 0 0.5\n"), FormatError);
  // negative prior
  CHECK_THROWS_AS(from_text("2 2\n0 1 0 1.5\n1 -1 0 -0.5\n"), FormatError);
  // M not a power of two
  CHECK_THROWS_AS(from_text("3 2\n00 1 0\n01 0 1\n10 -1 0\n"), FormatError);
  // D != 2
  CHECK_THROWS_AS(from_text("2 3\n0 1 0\n1 -1 0\n"), FormatError);
  // label width mismatch
  CHECK_THROWS_AS(from_text("2 2\n00 1 0\n01 -1 0\n"), FormatError);
  // truncated
  CHECK_THROWS_AS(from_text("4 2\n00 1 0\n01 0 1\n"), FormatError);
  CHECK_THROWS_AS(from_text(""), FormatError);
}

TEST_CASE("map_symbols is the indexed lookup") {
  Constellation c = builtin_constellation("c3");
  std::vector<uint8_t> u{0, 0, 0};
  auto x = map_symbols(u, c);
  REQUIRE(x.size() == 3);
  for (const auto& p : x) CHECK(p == c.points[0]);

  std::vector<uint8_t> bad{1, 8};
  CHECK_THROWS_AS(map_symbols(bad, c), InputError);
}

TEST_CASE("map then hard-decide with no noise round-trips") {
  Constellation c = builtin_constellation("c1");
  Rng rng(7);
  std::vector<uint8_t> u(256);
  for (auto& s : u) s = static_cast<uint8_t>(rng.below(8));
  auto x = map_symbols(u, c);
  AwgnChannel quiet{1e-12, 3};
  auto y = awgn_transmit(x, quiet);
  for (size_t i = 0; i < u.size(); ++i) CHECK(hard_decide(y[i], c) == u[i]);
}

TEST_CASE("post-FEC symbol errors do not depend on bit labels") {
  // the nonbinary decode path never consults labels, so relabeling the
  // same geometry must reproduce the identical error trajectory
  Constellation base = builtin_constellation("c3");
  Constellation relabeled = base;
  std::rotate(relabeled.labels.begin(), relabeled.labels.begin() + 3,
              relabeled.labels.end());

  SimOptions opts;
  opts.max_blocks = 8;
  opts.batch_blocks = 4;
  opts.target_block_errors = 1 << 30;  // run all blocks
  opts.target_symbol_errors = 1 << 30;
  opts.db_cap_records = 2000;
  PointResult a = run_point(testutil::small_code(), base, LinkKind::awgn, 7.0, opts);
  PointResult b =
      run_point(testutil::small_code(), relabeled, LinkKind::awgn, 7.0, opts);

  CHECK(a.symbol_errors > 0);  // comparison should be non-trivial
  CHECK(a.symbol_errors == b.symbol_errors);
  CHECK(a.block_errors == b.block_errors);
  CHECK(a.avg_iterations == b.avg_iterations);
  // bit-level quantities are allowed to move; symbol-level ones are not
  CHECK(a.post_fec_ser == b.post_fec_ser);
  CHECK(a.metrics.pre_fec_ser == b.metrics.pre_fec_ser);
}
