#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dcsit/channel_csit.hpp"
#include "dcsit/phase_plan.hpp"

namespace dcsit {

// Unit-norm beams for c, a, a', b, b'. u and v null the current estimates of
// the unintended user's channel; w, u', v' are pseudo-random and known to all.
struct BeamformerSet {
  CVec2 w, u, u_prime, v, v_prime;
};

/// Unit vector x with estimate^T x = 0; the first nonzero entry is real and
/// positive. Throws DegenerateInputError for a zero estimate.
CVec2 orthogonal_beam(const CVec2& estimate);

BeamformerSet build_beamformers(const CsitView& view, std::uint64_t slot_key, std::uint64_t seed);

// Linear powers of each stream (0 when absent).
struct StreamPowers {
  double c = 0, a = 0, a_prime = 0, b = 0, b_prime = 0;
};

StreamPowers stream_powers(const PhaseSpec& spec, double snr);

struct SymbolBlock {
  std::optional<Complex> c, a, a_prime, b, b_prime;
};

// Gaussian codebook samples at the powers of `spec`.
SymbolBlock draw_symbols(RngStream& rng, const PhaseSpec& spec, double snr);

// x = w c + u a + u' a' + v b + v' b'. Throws MismatchError if the symbols
// present differ from the streams in `spec`.
CVec2 transmit_slot(const PhaseSpec& spec, const BeamformerSet& bf, const SymbolBlock& sym);

struct InterferenceRecord {
  Complex iota1, iota2;              // h^T(v b + v' b'), g^T(u a + u' a')
  Complex check_iota1, check_iota2;  // same with delayed estimates
  Complex qbar_iota1, qbar_iota2;    // quantized check values
  Complex qerr1, qerr2;              // check - qbar
  std::size_t bits_used = 0;
};

// Quantization fields are left zero.
InterferenceRecord delayed_interference(const ChannelSample& sample, const BeamformerSet& bf,
                                        const SymbolBlock& sym);

// ceil((beta - alpha) log2 P) + margin, at least 2.
int interference_bits(const QualityPair& q, double snr, int margin_bits);

using BitString = std::vector<std::uint8_t>;  // one 0/1 entry per bit

// Side information a receiver needs to dequantize a batch.
struct QuantizerHeader {
  std::size_t count = 0;
  int bits_real = 0;
  int bits_imag = 0;
  double clip_range = 0.0;

  // Mean-square granular error per value, (step_re^2 + step_im^2) / 12.
  double nominal_distortion() const;
};

struct QuantizedBatch {
  QuantizerHeader header;
  std::vector<Complex> values;
  BitString bits;
};

/// Clipped uniform scalar quantizer on real and imaginary parts. Bits are
/// split evenly with the odd bit going to the real part; the clipping range
/// is +-4 standard deviations of the batch's per-dimension second moment.
/// Throws DomainError for an empty batch or fewer than 2 bits per value.
QuantizedBatch quantize_interference(std::span<const Complex> values, int bits_per_value);

// Inverse of the index encoding; reproduces QuantizedBatch::values exactly.
std::vector<Complex> dequantize(const BitString& bits, const QuantizerHeader& header);

/// Splits a bit stream across the next phase's common symbols; sizes differ
/// by at most one, the longer payloads first. Throws DomainError if
/// next_duration is zero.
std::vector<BitString> pack_common(const BitString& bits, std::size_t next_duration);

BitString unpack_common(std::span<const BitString> payloads);

}  // namespace dcsit
