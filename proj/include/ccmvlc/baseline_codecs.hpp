#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "ccmvlc/ccm_codec.hpp"

namespace ccmvlc {

// Uncoded BPSK: b -> 2b - 1 on the real axis.
std::vector<cdouble> bpsk_modulate(std::span<const Bit> bits);
std::vector<Bit> bpsk_demodulate(std::span<const cdouble> received, double gain);

/// Rate-1/4 feedforward convolutional code into Gray-labelled 16-QAM.
///
/// Generators are octal and read MSB-first over the register
/// (b_i, b_{i-1}, ..., b_{i-K+1}), so 0127 = 1010111 taps the current input
/// first. Coded bit c1 (from g1) is the label MSB; bits (c1,c2) pick the
/// in-phase level and (c3,c4) the quadrature level with Gray order
/// 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, scaled by 1/sqrt(10).
struct TcmParams {
  std::array<unsigned, 4> generators{0127, 0171, 0155, 0177};
  int constraint_length = 7;

  int num_states() const { return 1 << (constraint_length - 1); }
};

/// 4-bit labels, one per input bit, from the all-zero register.
std::vector<unsigned> tcm_encode_labels(std::span<const Bit> bits, const TcmParams& params = {});
cdouble qam16_point(unsigned label);
std::vector<cdouble> tcm_encode(std::span<const Bit> bits, const TcmParams& params = {});

/// 64-state Viterbi, metric |r - C s|^2, start state 0, free end, full traceback.
std::vector<Bit> tcm_decode(std::span<const cdouble> received, double gain, const TcmParams& params = {});

}  // namespace ccmvlc
