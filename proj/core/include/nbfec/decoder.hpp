#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nbfec/qc_code.hpp"

namespace nbfec {

// Check node processing rule. exact runs the full sum-product convolution
// in the probability domain; min_sum replaces it with a max-plus
// convolution in the log domain (max-log approximation).
enum class CheckRule { exact, min_sum };

struct DecodeResult {
  std::vector<uint8_t> symbols;
  int iterations = 0;  // full iterations completed when decoding stopped
  bool converged = false;
};

// Row-layered q-ary belief propagation. Each layer is one base row whose q
// circulant checks touch disjoint variables, so a layer is processed as a
// unit and posteriors are updated in place between layers.
//
// The step API (load / process_layer / hard_symbols) exposes the schedule
// for inspection; decode() wraps it with the early-stop loop.
class LayeredDecoder {
 public:
  explicit LayeredDecoder(const QcCode& code);

  // llrs holds n*(M-1) symbol log ratios against symbol 0, the layout
  // produced by symbol_llr_block.
  void load(std::span<const double> llrs);
  void process_layer(int layer, CheckRule rule = CheckRule::exact);
  int num_layers() const { return code_->mb; }
  std::vector<uint8_t> hard_symbols() const;
  bool check_converged() const;

  DecodeResult decode(std::span<const double> llrs, int max_iters = 15,
                      CheckRule rule = CheckRule::exact);

 private:
  const QcCode* code_;
  int M_;
  std::vector<double> post_;  // n*M posterior log masses
  std::vector<double> rmsg_;  // edges*q*M check-to-variable messages
  bool loaded_ = false;

  // per-check scratch, sized for the row weight
  std::vector<double> qbuf_, pbuf_, fwd_, bwd_, ext_, rlog_;
};

}  // namespace nbfec
