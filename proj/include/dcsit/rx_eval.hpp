#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcsit/channel_csit.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/tx_chain.hpp"

namespace dcsit {

// Per-realization common-symbol rates at each user, treating every other
// stream and the noise as Gaussian interference.
struct CommonRate {
  double user1 = 0.0;
  double user2 = 0.0;

  double min() const { return user1 < user2 ? user1 : user2; }
};

// Throws DomainError if the phase has no common stream.
CommonRate common_rate(const ChannelSample& sample, const PhaseSpec& spec, const BeamformerSet& bf);

// A common codeword spans many fading realizations, so its rate is what the
// weaker user sustains on average: min(E[I1], E[I2]).
double deliverable_common_rate(std::span<const CommonRate> slots);

// log2(1 + signal / (1 + interference))
double siso_rate(double signal_power, double interference_power);

/// The 2x2 system a user forms from its cleaned observation plus the fed-back
/// quantized interference seen by the other user.
struct EquivalentMimo {
  Eigen::Matrix2cd channel;
  std::array<double, 2> signal_powers{};
  Eigen::Matrix2cd noise_cov;
};

struct MimoRate {
  double bits = 0.0;
  bool regularized = false;
};

// log2 det(I + N^-1 H diag(p) H^H). A noise covariance that is not positive
// definite is loaded with 1e-12 I and flagged.
MimoRate mimo_private_rate(const EquivalentMimo& m);

// Rows [h^T u, h^T u'] and [check_g^T u, check_g^T u']. Row noise: residual
// delayed-CSIT leakage + AWGN + own-interference quantization error; and the
// cross-interference quantization error.
EquivalentMimo user1_equivalent_mimo(const ChannelSample& sample, const BeamformerSet& bf, const StreamPowers& pw,
                                     double own_distortion, double cross_distortion);
EquivalentMimo user2_equivalent_mimo(const ChannelSample& sample, const BeamformerSet& bf, const StreamPowers& pw,
                                     double own_distortion, double cross_distortion);

// Private rates of the final phase / single-slot scheme once c is removed.
struct FinalPrivateRates {
  double user1 = 0.0;
  double user2 = 0.0;
};

FinalPrivateRates final_private_rates(const ChannelSample& sample, const BeamformerSet& bf, const StreamPowers& pw);

struct X2Rates {
  CommonRate common;
  double private_a = 0.0;
  double private_b = 0.0;
};

X2Rates x2_rates(const ChannelSample& sample, const BeamformerSet& bf, const X2Plan& plan);

// Everything produced while running one trial of the multi-phase scheme.
struct SlotRecord {
  ChannelSample sample;
  BeamformerSet bf;
  SymbolBlock sym;
  Complex y1, y2;
  Complex z1, z2;
  InterferenceRecord interference;
};

struct PhaseRecord {
  PhaseSpec spec;
  StreamPowers powers;
  std::vector<SlotRecord> slots;
  // Interference of this phase, quantized (all phases but the last); values
  // are ordered [check_iota1 over slots, check_iota2 over slots].
  std::optional<QuantizedBatch> quantized;
  // Bits carried by this phase's common symbols (all phases but the first).
  std::vector<BitString> carried_payload;
};

struct TrialRecord {
  std::vector<PhaseRecord> phases;
};

struct PhaseDecode {
  double residual_power1 = 0.0;  // mean |iota1 - qbar_iota1|^2 over the phase
  double residual_power2 = 0.0;
  std::vector<EquivalentMimo> mimo_user1;
  std::vector<EquivalentMimo> mimo_user2;
};

/// Walks the trial backwards from the second phase: recovers each phase's
/// quantized interference from the next phase's common payloads, checks it
/// bit-exactly against the transmitter's values, strips it from the stored
/// observations, and assembles the equivalent MIMO channels.
/// Returns one entry per phase except the last. Throws IntegrityError if a
/// payload does not reproduce the quantized values.
std::vector<PhaseDecode> backward_decode_chain(const TrialRecord& trial);

}  // namespace dcsit
