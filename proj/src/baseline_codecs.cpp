#include "ccmvlc/baseline_codecs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "ccmvlc/error.hpp"

namespace ccmvlc {

namespace {

// Register word: bit (K-1) is the current input, bit 0 the oldest.
unsigned coded_label(unsigned reg, const TcmParams& p) {
  unsigned label = 0;
  for (unsigned g : p.generators) label = (label << 1) | (std::popcount(reg & g) & 1u);
  return label;
}

double gray_level(unsigned two_bits) {
  static constexpr double kLevels[4] = {-3.0, -1.0, 3.0, 1.0};  // 00, 01, 10, 11
  return kLevels[two_bits & 3u];
}

}  // namespace

std::vector<cdouble> bpsk_modulate(std::span<const Bit> bits) {
  std::vector<cdouble> out(bits.size());
  std::transform(bits.begin(), bits.end(), out.begin(), [](Bit b) { return cdouble{b ? 1.0 : -1.0, 0.0}; });
  return out;
}

std::vector<Bit> bpsk_demodulate(std::span<const cdouble> received, double gain) {
  if (!(gain > 0.0)) throw DomainError("decoder gain must be > 0");
  std::vector<Bit> out(received.size());
  std::transform(received.begin(), received.end(), out.begin(),
                 [gain](const cdouble& r) { return static_cast<Bit>(r.real() / gain > 0.0); });
  return out;
}

cdouble qam16_point(unsigned label) {
  static const double kScale = 1.0 / std::sqrt(10.0);
  return cdouble{gray_level(label >> 2), gray_level(label)} * kScale;
}

std::vector<unsigned> tcm_encode_labels(std::span<const Bit> bits, const TcmParams& params) {
  const int k = params.constraint_length;
  const unsigned mask = (1u << k) - 1u;
  std::vector<unsigned> labels;
  labels.reserve(bits.size());
  unsigned reg = 0;
  for (Bit b : bits) {
    reg = ((reg >> 1) | (static_cast<unsigned>(b & 1u) << (k - 1))) & mask;
    labels.push_back(coded_label(reg, params));
  }
  return labels;
}

std::vector<cdouble> tcm_encode(std::span<const Bit> bits, const TcmParams& params) {
  const auto labels = tcm_encode_labels(bits, params);
  std::vector<cdouble> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), qam16_point);
  return out;
}

std::vector<Bit> tcm_decode(std::span<const cdouble> received, double gain, const TcmParams& params) {
  if (!(gain > 0.0)) throw DomainError("decoder gain must be > 0");
  const int k = params.constraint_length;
  const unsigned n_states = static_cast<unsigned>(params.num_states());
  const std::size_t len = received.size();
  if (len == 0) return {};

  // State = the K-1 most recent inputs, newest in bit K-2.
  std::array<cdouble, 16> points;
  for (unsigned l = 0; l < 16; ++l) points[l] = gain * qam16_point(l);
  std::vector<unsigned> branch_label(2 * n_states);
  for (unsigned s = 0; s < n_states; ++s)
    for (unsigned b = 0; b < 2; ++b) branch_label[(s << 1) | b] = coded_label((b << (k - 1)) | s, params);

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> metric(n_states, inf), next(n_states);
  std::vector<std::uint8_t> survivor(len * n_states);  // predecessor's dropped (oldest) bit
  metric[0] = 0.0;
  std::array<double, 16> bm;

  for (std::size_t i = 0; i < len; ++i) {
    for (unsigned l = 0; l < 16; ++l) bm[l] = std::norm(received[i] - points[l]);
    std::uint8_t* surv = survivor.data() + i * n_states;
    for (unsigned ns = 0; ns < n_states; ++ns) {
      // ns = (b << (k-2)) | (s >> 1); the two predecessors differ in s's low bit.
      const unsigned b = ns >> (k - 2);
      const unsigned base = (ns << 1) & (n_states - 1);
      const unsigned s0 = base, s1 = base | 1u;
      const double m0 = metric[s0] + bm[branch_label[(s0 << 1) | b]];
      const double m1 = metric[s1] + bm[branch_label[(s1 << 1) | b]];
      if (m1 < m0) {
        next[ns] = m1;
        surv[ns] = 1;
      } else {
        next[ns] = m0;
        surv[ns] = 0;
      }
    }
    metric.swap(next);
  }

  unsigned state = static_cast<unsigned>(std::min_element(metric.begin(), metric.end()) - metric.begin());
  std::vector<Bit> out(len);
  for (std::size_t i = len; i-- > 0;) {
    out[i] = static_cast<Bit>(state >> (k - 2));
    state = ((state << 1) & (n_states - 1)) | survivor[i * n_states + state];
  }
  return out;
}

}  // namespace ccmvlc
