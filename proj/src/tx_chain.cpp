#include "dcsit/tx_chain.hpp"

#include <algorithm>
#include <cmath>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

constexpr double kClipSigmas = 4.0;
constexpr int kMaxBitsPerDimension = 62;

CVec2 random_unit_vector(RngStream& rng) {
  for (;;) {
    CVec2 v;
    v(0) = rng.complex_gaussian(1.0);
    v(1) = rng.complex_gaussian(1.0);
    const double n = v.norm();
    if (n > 0.0) return v / n;
  }
}

double power_of(const std::optional<StreamSpec>& s, double snr) {
  return s ? std::pow(snr, to_double(s->power_exp)) : 0.0;
}

std::optional<Complex> draw_if(RngStream& rng, const std::optional<StreamSpec>& s, double snr) {
  if (!s) return std::nullopt;
  return rng.complex_gaussian(power_of(s, snr));
}

void require_match(const std::optional<StreamSpec>& s, const std::optional<Complex>& x, const char* name) {
  if (s.has_value() != x.has_value()) {
    throw MismatchError(std::string("symbol '") + name + (s ? "' missing for phase" : "' not in phase"));
  }
}

Complex value_or_zero(const std::optional<Complex>& x) { return x.value_or(Complex{}); }

double step(double range, int bits) { return 2.0 * range / std::ldexp(1.0, bits); }

std::uint64_t quantize_index(double x, double range, int bits) {
  const double delta = step(range, bits);
  if (delta == 0.0) return 0;
  const double levels = std::ldexp(1.0, bits);
  const double idx = std::floor((x + range) / delta);
  return static_cast<std::uint64_t>(std::clamp(idx, 0.0, levels - 1.0));
}

double reconstruct(std::uint64_t idx, double range, int bits) {
  return -range + (static_cast<double>(idx) + 0.5) * step(range, bits);
}

void put_bits(BitString& out, std::uint64_t value, int bits) {
  for (int i = bits - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

std::uint64_t get_bits(const BitString& in, std::size_t& pos, int bits) {
  std::uint64_t v = 0;
  for (int i = 0; i < bits; ++i) {
    const std::uint8_t bit = in[pos++];
    if (bit > 1) throw IntegrityError("bit stream holds a non-binary entry");
    v = (v << 1) | bit;
  }
  return v;
}

}  // namespace

CVec2 orthogonal_beam(const CVec2& estimate) {
  const double n = estimate.norm();
  if (!(n > 0.0)) throw DegenerateInputError("cannot null a zero channel estimate");
  CVec2 u;
  u(0) = estimate(1) / n;
  u(1) = -estimate(0) / n;
  for (int i = 0; i < 2; ++i) {
    const double mag = std::abs(u(i));
    if (mag > 0.0) {
      const Complex phase = std::conj(u(i)) / mag;
      u *= phase;
      u(i) = mag;
      break;
    }
  }
  return u;
}

BeamformerSet build_beamformers(const CsitView& view, std::uint64_t slot_key, std::uint64_t seed) {
  RngStream rng(derive_key({seed, static_cast<std::uint64_t>(Lane::beamformer), slot_key}));
  BeamformerSet bf;
  bf.u = orthogonal_beam(view.hat_g);
  bf.v = orthogonal_beam(view.hat_h);
  bf.w = random_unit_vector(rng);
  bf.u_prime = random_unit_vector(rng);
  bf.v_prime = random_unit_vector(rng);
  return bf;
}

StreamPowers stream_powers(const PhaseSpec& spec, double snr) {
  return {power_of(spec.c, snr), power_of(spec.a, snr), power_of(spec.a_prime, snr), power_of(spec.b, snr),
          power_of(spec.b_prime, snr)};
}

SymbolBlock draw_symbols(RngStream& rng, const PhaseSpec& spec, double snr) {
  SymbolBlock s;
  s.c = draw_if(rng, spec.c, snr);
  s.a = draw_if(rng, spec.a, snr);
  s.a_prime = draw_if(rng, spec.a_prime, snr);
  s.b = draw_if(rng, spec.b, snr);
  s.b_prime = draw_if(rng, spec.b_prime, snr);
  return s;
}

CVec2 transmit_slot(const PhaseSpec& spec, const BeamformerSet& bf, const SymbolBlock& sym) {
  require_match(spec.c, sym.c, "c");
  require_match(spec.a, sym.a, "a");
  require_match(spec.a_prime, sym.a_prime, "a'");
  require_match(spec.b, sym.b, "b");
  require_match(spec.b_prime, sym.b_prime, "b'");
  CVec2 x = CVec2::Zero();
  x += bf.w * value_or_zero(sym.c);
  x += bf.u * value_or_zero(sym.a);
  x += bf.u_prime * value_or_zero(sym.a_prime);
  x += bf.v * value_or_zero(sym.b);
  x += bf.v_prime * value_or_zero(sym.b_prime);
  return x;
}

InterferenceRecord delayed_interference(const ChannelSample& sample, const BeamformerSet& bf,
                                        const SymbolBlock& sym) {
  const CVec2 to_user2 = bf.v * value_or_zero(sym.b) + bf.v_prime * value_or_zero(sym.b_prime);
  const CVec2 to_user1 = bf.u * value_or_zero(sym.a) + bf.u_prime * value_or_zero(sym.a_prime);
  InterferenceRecord r;
  r.iota1 = effective_gain(sample.h, to_user2);
  r.iota2 = effective_gain(sample.g, to_user1);
  r.check_iota1 = effective_gain(sample.check_h, to_user2);
  r.check_iota2 = effective_gain(sample.check_g, to_user1);
  return r;
}

int interference_bits(const QualityPair& q, double snr, int margin_bits) {
  const double prelog = to_double(q.beta - q.alpha) * std::log2(snr);
  const int bits = static_cast<int>(std::ceil(prelog - 1e-9)) + margin_bits;
  return std::max(bits, 2);
}

double QuantizerHeader::nominal_distortion() const {
  const double dr = step(clip_range, bits_real);
  const double di = step(clip_range, bits_imag);
  return (dr * dr + di * di) / 12.0;
}

QuantizedBatch quantize_interference(std::span<const Complex> values, int bits_per_value) {
  if (values.empty()) throw DomainError("quantize_interference: empty batch");
  if (bits_per_value < 2) throw DomainError("quantize_interference: need at least 2 bits per value");
  QuantizedBatch out;
  out.header.count = values.size();
  out.header.bits_real = (bits_per_value + 1) / 2;
  out.header.bits_imag = bits_per_value / 2;
  if (out.header.bits_real > kMaxBitsPerDimension) {
    throw DomainError("quantize_interference: too many bits per value");
  }

  double second_moment = 0.0;
  for (const auto& v : values) second_moment += std::norm(v);
  const double per_dim_var = second_moment / (2.0 * static_cast<double>(values.size()));
  out.header.clip_range = kClipSigmas * std::sqrt(per_dim_var);

  const auto& h = out.header;
  out.bits.reserve(values.size() * static_cast<std::size_t>(bits_per_value));
  out.values.reserve(values.size());
  for (const auto& v : values) {
    const std::uint64_t ir = quantize_index(v.real(), h.clip_range, h.bits_real);
    const std::uint64_t ii = quantize_index(v.imag(), h.clip_range, h.bits_imag);
    put_bits(out.bits, ir, h.bits_real);
    put_bits(out.bits, ii, h.bits_imag);
    out.values.emplace_back(reconstruct(ir, h.clip_range, h.bits_real), reconstruct(ii, h.clip_range, h.bits_imag));
  }
  return out;
}

std::vector<Complex> dequantize(const BitString& bits, const QuantizerHeader& header) {
  const std::size_t per_value = static_cast<std::size_t>(header.bits_real + header.bits_imag);
  if (bits.size() != header.count * per_value) {
    throw IntegrityError("payload holds " + std::to_string(bits.size()) + " bits, header expects " +
                         std::to_string(header.count * per_value));
  }
  std::vector<Complex> out;
  out.reserve(header.count);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < header.count; ++i) {
    const std::uint64_t ir = get_bits(bits, pos, header.bits_real);
    const std::uint64_t ii = get_bits(bits, pos, header.bits_imag);
    out.emplace_back(reconstruct(ir, header.clip_range, header.bits_real),
                     reconstruct(ii, header.clip_range, header.bits_imag));
  }
  return out;
}

std::vector<BitString> pack_common(const BitString& bits, std::size_t next_duration) {
  if (next_duration == 0) throw DomainError("pack_common: next phase has no slots");
  const std::size_t base = bits.size() / next_duration;
  const std::size_t extra = bits.size() % next_duration;
  std::vector<BitString> out(next_duration);
  auto it = bits.begin();
  for (std::size_t i = 0; i < next_duration; ++i) {
    const std::size_t n = base + (i < extra ? 1 : 0);
    out[i].assign(it, it + static_cast<std::ptrdiff_t>(n));
    it += static_cast<std::ptrdiff_t>(n);
  }
  return out;
}

BitString unpack_common(std::span<const BitString> payloads) {
  BitString out;
  for (const auto& p : payloads) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace dcsit
