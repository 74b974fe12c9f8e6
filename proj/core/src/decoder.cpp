#include "nbfec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nbfec/demod.hpp"
#include "nbfec/errors.hpp"

namespace nbfec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// out[s] = sum_a A[a] * B[a ^ s]; field addition over GF(2^m) is xor
void gf_conv(const double* A, const double* B, double* out, int M) {
  for (int s = 0; s < M; ++s) {
    double acc = 0.0;
    for (int a = 0; a < M; ++a) acc += A[a] * B[a ^ s];
    out[s] = acc;
  }
}

void gf_conv_max(const double* A, const double* B, double* out, int M) {
  for (int s = 0; s < M; ++s) {
    double acc = kNegInf;
    for (int a = 0; a < M; ++a) acc = std::max(acc, A[a] + B[a ^ s]);
    out[s] = acc;
  }
}

void scale_to_unit_max(double* v, int M) {
  double mx = v[0];
  for (int a = 1; a < M; ++a) mx = std::max(mx, v[a]);
  if (mx > 0.0) {
    double inv = 1.0 / mx;
    for (int a = 0; a < M; ++a) v[a] *= inv;
  }
}

void shift_to_zero_max(double* v, int M) {
  double mx = v[0];
  for (int a = 1; a < M; ++a) mx = std::max(mx, v[a]);
  for (int a = 0; a < M; ++a) v[a] -= mx;
}

}  // namespace

LayeredDecoder::LayeredDecoder(const QcCode& code)
    : code_(&code), M_(code.gf.size()) {
  post_.resize(code.n * M_);
  rmsg_.resize(code.edges.size() * static_cast<size_t>(code.q) * M_);
  size_t w = static_cast<size_t>(code.dc) * M_;
  qbuf_.resize(w);
  pbuf_.resize(w);
  fwd_.resize(w);
  bwd_.resize(w);
  ext_.resize(M_);
  rlog_.resize(M_);
}

void LayeredDecoder::load(std::span<const double> llrs) {
  const size_t n = code_->n;
  if (llrs.size() != n * static_cast<size_t>(M_ - 1)) {
    throw InputError("decoder load: expected n*(M-1) log ratios");
  }
  for (size_t v = 0; v < n; ++v) {
    post_[v * M_] = 0.0;
    for (int a = 1; a < M_; ++a) {
      post_[v * M_ + a] = llrs[v * (M_ - 1) + a - 1];
    }
  }
  std::fill(rmsg_.begin(), rmsg_.end(), 0.0);
  loaded_ = true;
}

void LayeredDecoder::process_layer(int layer, CheckRule rule) {
  if (!loaded_) throw InputError("decoder: process_layer before load");
  if (layer < 0 || layer >= code_->mb) throw InputError("decoder: bad layer index");

  const QcCode& c = *code_;
  const int q = c.q;
  const auto& eids = c.row_edges[layer];
  const int dc = static_cast<int>(eids.size());
  const bool exact = rule == CheckRule::exact;

  for (int z = 0; z < q; ++z) {
    // gather extrinsic inputs and permute by the edge coefficients
    for (int i = 0; i < dc; ++i) {
      int e = eids[i];
      const auto& be = c.edges[e];
      int w = be.shift + z;
      if (w >= q) w -= q;
      size_t v = static_cast<size_t>(be.col) * q + w;
      const double* pv = &post_[v * M_];
      const double* rm = &rmsg_[(static_cast<size_t>(e) * q + z) * M_];
      double* qb = &qbuf_[static_cast<size_t>(i) * M_];
      for (int a = 0; a < M_; ++a) qb[a] = pv[a] - rm[a];
      shift_to_zero_max(qb, M_);

      uint8_t h = c.coeff[static_cast<size_t>(e) * q + z];
      const uint8_t* mr = c.gf.mul_row(h);
      double* pb = &pbuf_[static_cast<size_t>(i) * M_];
      if (exact) {
        for (int a = 0; a < M_; ++a) pb[mr[a]] = std::exp(qb[a]);
      } else {
        for (int a = 0; a < M_; ++a) pb[mr[a]] = qb[a];
      }
    }

    // forward-backward over the row
    auto conv = exact ? gf_conv : gf_conv_max;
    auto renorm = exact ? scale_to_unit_max : shift_to_zero_max;
    std::copy_n(&pbuf_[0], M_, &fwd_[0]);
    for (int i = 1; i < dc; ++i) {
      conv(&fwd_[(static_cast<size_t>(i) - 1) * M_],
           &pbuf_[static_cast<size_t>(i) * M_],
           &fwd_[static_cast<size_t>(i) * M_], M_);
      renorm(&fwd_[static_cast<size_t>(i) * M_], M_);
    }
    std::copy_n(&pbuf_[static_cast<size_t>(dc - 1) * M_], M_,
                &bwd_[static_cast<size_t>(dc - 1) * M_]);
    for (int i = dc - 2; i >= 0; --i) {
      conv(&pbuf_[static_cast<size_t>(i) * M_],
           &bwd_[(static_cast<size_t>(i) + 1) * M_],
           &bwd_[static_cast<size_t>(i) * M_], M_);
      renorm(&bwd_[static_cast<size_t>(i) * M_], M_);
    }

    for (int i = 0; i < dc; ++i) {
      if (i == 0) {
        std::copy_n(&bwd_[1 * static_cast<size_t>(M_)], M_, ext_.data());
      } else if (i == dc - 1) {
        std::copy_n(&fwd_[(static_cast<size_t>(dc) - 2) * M_], M_, ext_.data());
      } else {
        conv(&fwd_[(static_cast<size_t>(i) - 1) * M_],
             &bwd_[(static_cast<size_t>(i) + 1) * M_], ext_.data(), M_);
      }

      int e = eids[i];
      const auto& be = c.edges[e];
      uint8_t h = c.coeff[static_cast<size_t>(e) * q + z];
      const uint8_t* mr = c.gf.mul_row(h);
      if (exact) {
        for (int a = 0; a < M_; ++a) {
          double p = ext_[mr[a]];
          rlog_[a] = p > 0.0 ? std::log(p) : kNegInf;
        }
      } else {
        for (int a = 0; a < M_; ++a) rlog_[a] = ext_[mr[a]];
      }
      shift_to_zero_max(rlog_.data(), M_);
      for (int a = 0; a < M_; ++a) {
        rlog_[a] = std::max(rlog_[a], -kLlrClamp);
      }

      int w = be.shift + z;
      if (w >= q) w -= q;
      size_t v = static_cast<size_t>(be.col) * q + w;
      double* pv = &post_[v * M_];
      double* rm = &rmsg_[(static_cast<size_t>(e) * q + z) * M_];
      const double* qb = &qbuf_[static_cast<size_t>(i) * M_];
      for (int a = 0; a < M_; ++a) {
        rm[a] = rlog_[a];
        pv[a] = qb[a] + rlog_[a];
      }
      shift_to_zero_max(pv, M_);
    }
  }
}

std::vector<uint8_t> LayeredDecoder::hard_symbols() const {
  const size_t n = code_->n;
  std::vector<uint8_t> out(n);
  for (size_t v = 0; v < n; ++v) {
    const double* pv = &post_[v * M_];
    int best = 0;
    for (int a = 1; a < M_; ++a) {
      if (pv[a] > pv[best]) best = a;
    }
    out[v] = static_cast<uint8_t>(best);
  }
  return out;
}

bool LayeredDecoder::check_converged() const {
  return syndrome_zero(*code_, hard_symbols());
}

DecodeResult LayeredDecoder::decode(std::span<const double> llrs, int max_iters,
                                    CheckRule rule) {
  load(llrs);
  DecodeResult res;
  for (int it = 1; it <= max_iters; ++it) {
    for (int layer = 0; layer < code_->mb; ++layer) process_layer(layer, rule);
    res.iterations = it;
    if (check_converged()) {
      res.converged = true;
      break;
    }
  }
  res.symbols = hard_symbols();
  return res;
}

}  // namespace nbfec
