#include "dcsit/rx_eval.hpp"

#include <cmath>
#include <cstring>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

constexpr double kNoiseLoading = 1e-12;

double gain2(const CVec2& channel, const CVec2& beam) { return std::norm(effective_gain(channel, beam)); }

bool same_bits(const Complex& x, const Complex& y) { return std::memcmp(&x, &y, sizeof(Complex)) == 0; }

Complex value_or_zero(const std::optional<Complex>& x) { return x.value_or(Complex{}); }

}  // namespace

double siso_rate(double signal_power, double interference_power) {
  return std::log2(1.0 + signal_power / (1.0 + interference_power));
}

CommonRate common_rate(const ChannelSample& sample, const PhaseSpec& spec, const BeamformerSet& bf) {
  if (!spec.c) throw DomainError("common_rate: phase has no common stream");
  const StreamPowers pw = stream_powers(spec, sample.snr);
  auto at = [&](const CVec2& ch) {
    const double interference = gain2(ch, bf.u) * pw.a + gain2(ch, bf.u_prime) * pw.a_prime +
                                gain2(ch, bf.v) * pw.b + gain2(ch, bf.v_prime) * pw.b_prime;
    return siso_rate(gain2(ch, bf.w) * pw.c, interference);
  };
  return {at(sample.h), at(sample.g)};
}

double deliverable_common_rate(std::span<const CommonRate> slots) {
  if (slots.empty()) return 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (const auto& r : slots) {
    s1 += r.user1;
    s2 += r.user2;
  }
  const double n = static_cast<double>(slots.size());
  return std::min(s1 / n, s2 / n);
}

MimoRate mimo_private_rate(const EquivalentMimo& m) {
  MimoRate out;
  Eigen::Matrix2cd noise = m.noise_cov;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(noise, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    noise += kNoiseLoading * Eigen::Matrix2cd::Identity();
    out.regularized = true;
  }
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  d(0, 0) = m.signal_powers[0];
  d(1, 1) = m.signal_powers[1];
  const Eigen::Matrix2cd gram = m.channel * d * m.channel.adjoint();
  const Eigen::Matrix2cd system = Eigen::Matrix2cd::Identity() + noise.inverse() * gram;
  out.bits = std::log2(std::abs(system.determinant()));
  return out;
}

EquivalentMimo user1_equivalent_mimo(const ChannelSample& s, const BeamformerSet& bf, const StreamPowers& pw,
                                     double own_distortion, double cross_distortion) {
  EquivalentMimo m;
  m.channel << effective_gain(s.h, bf.u), effective_gain(s.h, bf.u_prime), effective_gain(s.check_g, bf.u),
      effective_gain(s.check_g, bf.u_prime);
  m.signal_powers = {pw.a, pw.a_prime};
  const double leakage = gain2(s.ddot_h, bf.v) * pw.b + gain2(s.ddot_h, bf.v_prime) * pw.b_prime;
  m.noise_cov = Eigen::Matrix2cd::Zero();
  m.noise_cov(0, 0) = leakage + 1.0 + own_distortion;
  m.noise_cov(1, 1) = cross_distortion;
  return m;
}

EquivalentMimo user2_equivalent_mimo(const ChannelSample& s, const BeamformerSet& bf, const StreamPowers& pw,
                                     double own_distortion, double cross_distortion) {
  EquivalentMimo m;
  m.channel << effective_gain(s.check_h, bf.v), effective_gain(s.check_h, bf.v_prime), effective_gain(s.g, bf.v),
      effective_gain(s.g, bf.v_prime);
  m.signal_powers = {pw.b, pw.b_prime};
  const double leakage = gain2(s.ddot_g, bf.u) * pw.a + gain2(s.ddot_g, bf.u_prime) * pw.a_prime;
  m.noise_cov = Eigen::Matrix2cd::Zero();
  m.noise_cov(0, 0) = cross_distortion;
  m.noise_cov(1, 1) = leakage + 1.0 + own_distortion;
  return m;
}

FinalPrivateRates final_private_rates(const ChannelSample& s, const BeamformerSet& bf, const StreamPowers& pw) {
  return {siso_rate(gain2(s.h, bf.u) * pw.a, gain2(s.h, bf.v) * pw.b),
          siso_rate(gain2(s.g, bf.v) * pw.b, gain2(s.g, bf.u) * pw.a)};
}

X2Rates x2_rates(const ChannelSample& sample, const BeamformerSet& bf, const X2Plan& plan) {
  const StreamPowers pw = stream_powers(plan.slot, sample.snr);
  const FinalPrivateRates priv = final_private_rates(sample, bf, pw);
  return {common_rate(sample, plan.slot, bf), priv.user1, priv.user2};
}

std::vector<PhaseDecode> backward_decode_chain(const TrialRecord& trial) {
  std::vector<PhaseDecode> out;
  if (trial.phases.size() < 2) return out;
  for (std::size_t s = 0; s + 1 < trial.phases.size(); ++s) {
    const PhaseRecord& phase = trial.phases[s];
    const PhaseRecord& next = trial.phases[s + 1];
    if (!phase.quantized) throw IntegrityError("phase " + std::to_string(s + 1) + " was never quantized");

    const BitString bits = unpack_common(next.carried_payload);
    const std::vector<Complex> qbar = dequantize(bits, phase.quantized->header);
    const std::size_t T = phase.slots.size();
    if (qbar.size() != 2 * T) throw IntegrityError("payload value count does not match the phase length");

    const double distortion = phase.quantized->header.nominal_distortion();
    PhaseDecode d;
    for (std::size_t t = 0; t < T; ++t) {
      const SlotRecord& slot = phase.slots[t];
      const Complex& q1 = qbar[t];
      const Complex& q2 = qbar[T + t];
      if (!same_bits(q1, slot.interference.qbar_iota1) || !same_bits(q2, slot.interference.qbar_iota2)) {
        throw IntegrityError("phase " + std::to_string(s + 1) + " slot " + std::to_string(t + 1) +
                             ": unpacked interference differs from the transmitted value");
      }
      // y - h^T w c - qbar leaves (iota - qbar) on top of the private streams and noise.
      const Complex common1 = effective_gain(slot.sample.h, slot.bf.w) * value_or_zero(slot.sym.c);
      const Complex common2 = effective_gain(slot.sample.g, slot.bf.w) * value_or_zero(slot.sym.c);
      const Complex own1 = effective_gain(slot.sample.h, slot.bf.u) * value_or_zero(slot.sym.a) +
                           effective_gain(slot.sample.h, slot.bf.u_prime) * value_or_zero(slot.sym.a_prime);
      const Complex own2 = effective_gain(slot.sample.g, slot.bf.v) * value_or_zero(slot.sym.b) +
                           effective_gain(slot.sample.g, slot.bf.v_prime) * value_or_zero(slot.sym.b_prime);
      const Complex residual1 = slot.y1 - common1 - q1 - own1 - slot.z1;
      const Complex residual2 = slot.y2 - common2 - q2 - own2 - slot.z2;
      d.residual_power1 += std::norm(residual1);
      d.residual_power2 += std::norm(residual2);
      d.mimo_user1.push_back(user1_equivalent_mimo(slot.sample, slot.bf, phase.powers, distortion, distortion));
      d.mimo_user2.push_back(user2_equivalent_mimo(slot.sample, slot.bf, phase.powers, distortion, distortion));
    }
    d.residual_power1 /= static_cast<double>(T);
    d.residual_power2 /= static_cast<double>(T);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace dcsit
