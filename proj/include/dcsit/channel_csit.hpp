#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

#include "dcsit/rational.hpp"
#include "dcsit/rng.hpp"

namespace dcsit {

using Complex = std::complex<double>;
using CVec2 = Eigen::Vector2cd;

// Received-signal gain of a beam: channel^T * beam (no conjugation).
inline Complex effective_gain(const CVec2& channel, const CVec2& beam) {
  return channel(0) * beam(0) + channel(1) * beam(1);
}

// CSIT quality exponents. Current estimation error power scales as P^-alpha,
// delayed as P^-beta.
struct QualityPair {
  Rational alpha;
  Rational beta;

  friend bool operator==(const QualityPair&, const QualityPair&) = default;
};

struct NormalizedQuality {
  QualityPair q;
  bool clamped = false;
};

/// Maps raw exponents onto the canonical range 0 <= alpha <= beta <= 1. A
/// delayed estimate is never worse than the current one (the transmitter can
/// always recall the current estimate later), so beta < alpha becomes
/// beta = alpha. Throws DomainError if either input is outside [0, 1].
NormalizedQuality normalize_quality(const Rational& alpha_raw, const Rational& beta_raw);

// What the transmitter knows within the slot.
struct CsitView {
  CVec2 hat_h;
  CVec2 hat_g;
};

// One slot of the two-user MISO channel: true channels h (user 1) and g
// (user 2), their current (hat) and delayed (check) estimates, and the
// corresponding errors tilde = truth - hat, ddot = truth - check.
struct ChannelSample {
  CVec2 h, g;
  CVec2 hat_h, hat_g;
  CVec2 check_h, check_g;
  CVec2 tilde_h, tilde_g;
  CVec2 ddot_h, ddot_g;
  double snr = 1.0;  // linear P

  CsitView current() const { return {hat_h, hat_g}; }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Draws true channels with i.i.d. CN(0,1) entries and independent estimation
/// errors with per-entry variance P^-alpha (current) and P^-beta (delayed).
/// The splits truth = estimate + error hold exactly in floating point.
/// Requires snr > 1.
ChannelSample draw_sample(RngStream& rng, double snr, const QualityPair& q);

enum class ErrorKind { current, delayed };

/// Fits the decay exponent of the mean per-entry error power between two SNR
/// levels: returns -d log(E|err|^2) / d log P. Each span must hold samples at
/// one common SNR, at least 1000 of them, and the SNRs must be >= 20 dB apart.
double measure_error_exponent(std::span<const ChannelSample> low, std::span<const ChannelSample> high,
                              ErrorKind which);

}  // namespace dcsit
