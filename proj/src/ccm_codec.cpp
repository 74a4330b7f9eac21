#include "ccmvlc/ccm_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccmvlc/error.hpp"

namespace ccmvlc {

bool CcmParams::is_multi_tent() const {
  return std::all_of(taps.begin(), taps.end(), [](Bit t) { return t == 1; });
}

void CcmParams::validate() const {
  for (std::size_t k = 0; k < taps.size(); ++k) {
    if (taps[k] > 1) throw ConfigError("tap u" + std::to_string(k + 1) + " is not binary");
  }
  if (q < 2 || q > kMaxQuantization) {
    throw ConfigError("quantization depth Q must lie in [2, " +
                      std::to_string(kMaxQuantization) + "], got " + std::to_string(q));
  }
}

EncoderState next_state(EncoderState state, Bit bit, const CcmParams& params) {
  const int q = params.q;
  const auto& u = params.taps;
  auto v = [state](int k) -> unsigned { return (state >> (k - 1)) & 1u; };
  const unsigned b = bit & 1u;

  EncoderState out = 0;
  const unsigned msb = (u[0] & v(q)) ^ (u[1] & v(q - 1)) ^ (u[2] & b);
  out |= msb << (q - 1);
  for (int j = q - 1; j >= 2; --j) {
    const unsigned vj = (u[3] & v(j - 1)) ^ (u[4] & v(q));
    out |= vj << (j - 1);
  }
  out |= (u[5] & b);
  return out;
}

double state_to_z(EncoderState state, int q) { return std::ldexp(static_cast<double>(state), -q); }

std::vector<EncoderState> encode_states(std::span<const Bit> bits, const CcmParams& params,
                                        EncoderState start) {
  params.validate();
  std::vector<EncoderState> out;
  out.reserve(bits.size());
  EncoderState s = start;
  for (Bit b : bits) {
    s = next_state(s, b, params);
    out.push_back(s);
  }
  return out;
}

std::vector<double> encode_block(std::span<const Bit> bits, const CcmParams& params) {
  auto states = encode_states(bits, params);
  std::vector<double> z(states.size());
  std::transform(states.begin(), states.end(), z.begin(),
                 [q = params.q](EncoderState s) { return state_to_z(s, q); });
  return z;
}

double map_recursion_step(double z, Bit bit) {
  const double fold = std::abs(2.0 * z - 1.0);
  if (bit == 0) return 1.0 - fold;
  return std::fmod(1.5 - fold, 1.0);
}

double perturbed_recursion_step(double z, Bit bit, int q) {
  return map_recursion_step(z, bit) + (bit ? std::ldexp(1.0, -q) : 0.0);
}

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

Trellis::Trellis(const CcmParams& params) : params_(params) {
  params_.validate();
  const std::uint32_t n = params_.num_states();
  table_.resize(2 * static_cast<std::size_t>(n));
  for (EncoderState s = 0; s < n; ++s) {
    table_[(s << 1) | 0] = next_state(s, 0, params_);
    table_[(s << 1) | 1] = next_state(s, 1, params_);
  }
}

std::vector<Bit> viterbi_decode(std::span<const cdouble> received, double gain,
                                std::span<const cdouble> symbol_map, const CcmParams& params) {
  const Trellis trellis(params);
  const std::uint32_t n_states = trellis.num_states();
  if (symbol_map.size() != n_states) {
    throw LengthMismatch("symbol map has " + std::to_string(symbol_map.size()) +
                         " entries, trellis has " + std::to_string(n_states) + " states");
  }
  if (!(gain > 0.0) || !std::isfinite(gain)) throw DomainError("decoder gain must be finite and > 0");
  for (const auto& r : received) {
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
      throw DomainError("received sequence contains non-finite samples");
    }
  }

  const std::size_t len = received.size();
  if (len == 0) return {};

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> metric(n_states, inf), next_metric(n_states);
  std::vector<double> branch(n_states);
  // survivor[i * n_states + s] = (predecessor << 1) | bit for the path into s at step i
  std::vector<std::uint32_t> survivor(len * n_states);
  metric[0] = 0.0;

  for (std::size_t i = 0; i < len; ++i) {
    const cdouble r = received[i];
    // The branch symbol is the point of the state the branch enters.
    for (std::uint32_t s = 0; s < n_states; ++s) branch[s] = std::norm(r - gain * symbol_map[s]);
    std::fill(next_metric.begin(), next_metric.end(), inf);
    std::uint32_t* surv = survivor.data() + i * n_states;
    for (std::uint32_t s = 0; s < n_states; ++s) {
      const double m = metric[s];
      if (m == inf) continue;
      for (Bit b = 0; b < 2; ++b) {
        const EncoderState ns = trellis.next(s, b);
        const double cand = m + branch[ns];
        if (cand < next_metric[ns]) {
          next_metric[ns] = cand;
          surv[ns] = (s << 1) | b;
        }
      }
    }
    metric.swap(next_metric);
  }

  std::uint32_t state = static_cast<std::uint32_t>(
      std::min_element(metric.begin(), metric.end()) - metric.begin());
  std::vector<Bit> bits(len);
  for (std::size_t i = len; i-- > 0;) {
    const std::uint32_t entry = survivor[i * n_states + state];
    bits[i] = static_cast<Bit>(entry & 1u);
    state = entry >> 1;
  }
  return bits;
}

}  // namespace ccmvlc
