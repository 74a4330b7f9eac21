#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace ccmvlc {

using Bit = std::uint8_t;
using cdouble = std::complex<double>;

/// Taps and quantization depth of a chaos-based trellis encoder.
///
/// The register update is
///   v'_Q = u1 v_Q ^ u2 v_{Q-1} ^ u3 b
///   v'_j = u4 v_{j-1} ^ u5 v_Q        (j = Q-1 .. 2)
///   v'_1 = u6 b
/// and u = (1,1,1,1,1,1) reproduces the multi-tent map.
struct CcmParams {
  std::array<Bit, 6> taps{1, 1, 1, 1, 1, 1};
  int q = 6;

  static CcmParams multi_tent(int q = 6) { return CcmParams{{1, 1, 1, 1, 1, 1}, q}; }

  bool is_multi_tent() const;
  std::uint32_t num_states() const { return 1u << q; }
  void validate() const;
};

constexpr int kMaxQuantization = 16;

/// Register contents packed LSB-first: bit (k-1) holds v_k, so the packed
/// integer m is exactly z * 2^Q.
using EncoderState = std::uint32_t;

EncoderState next_state(EncoderState state, Bit bit, const CcmParams& params);

/// z = sum_k 2^-(Q+1-k) v_k.
double state_to_z(EncoderState state, int q);

/// Runs the encoder from the all-zero state and returns z_i after every step.
std::vector<double> encode_block(std::span<const Bit> bits, const CcmParams& params);

/// Same walk as encode_block but returns the raw register values.
std::vector<EncoderState> encode_states(std::span<const Bit> bits, const CcmParams& params,
                                        EncoderState start = 0);

/// Unperturbed multi-tent map: f(z,0) = 1-|2z-1|, f(z,1) = (3/2-|2z-1|) mod 1.
double map_recursion_step(double z, Bit bit);

/// f(z,b) + b 2^-Q, the real-valued controlled recursion the register emulates.
double perturbed_recursion_step(double z, Bit bit, int q);

/// Distance between two points of [0,1) measured on the unit circle.
double circular_distance(double a, double b);

/// Precomputed next-state table for one parameter set.
class Trellis {
 public:
  explicit Trellis(const CcmParams& params);

  const CcmParams& params() const { return params_; }
  std::uint32_t num_states() const { return params_.num_states(); }
  EncoderState next(EncoderState s, Bit b) const { return table_[(s << 1) | b]; }

 private:
  CcmParams params_;
  std::vector<EncoderState> table_;
};

/// Maximum-likelihood sequence decoder for the CCM trellis.
///
/// `symbol_map[m]` is the transmitted point for state value m (z = m 2^-Q).
/// The path starts in state 0, the terminal state is free, and the whole
/// block is traced back.
std::vector<Bit> viterbi_decode(std::span<const cdouble> received, double gain,
                                std::span<const cdouble> symbol_map, const CcmParams& params);

}  // namespace ccmvlc
