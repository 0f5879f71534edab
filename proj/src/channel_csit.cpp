#include "dcsit/channel_csit.hpp"

#include <cmath>
#include <utility>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

constexpr std::size_t kMinExponentSamples = 1000;
constexpr double kMinSnrRatio = 100.0;

// estimate = truth - error, with error recomputed so that estimate + error
// reproduces truth bit for bit.
// Channel entries and errors live on a 2^-48 grid. Sums and differences of
// grid values below 2^5 in magnitude are exact in double precision, so both
// truth = hat + tilde and truth = check + ddot hold bit for bit.
constexpr int kGridBits = 48;

double snap(double x) { return std::ldexp(std::nearbyint(std::ldexp(x, kGridBits)), -kGridBits); }

CVec2 snap(const CVec2& v) {
  CVec2 out;
  for (int i = 0; i < 2; ++i) out(i) = {snap(v(i).real()), snap(v(i).imag())};
  return out;
}

void split_exact(const CVec2& truth, const CVec2& error, CVec2& estimate, CVec2& residual) {
  residual = snap(error);
  estimate = truth - residual;
}

CVec2 gaussian_vector(RngStream& rng, double variance) {
  CVec2 v;
  v(0) = rng.complex_gaussian(variance);
  v(1) = rng.complex_gaussian(variance);
  return v;
}

double mean_error_power(std::span<const ChannelSample> samples, ErrorKind which) {
  double acc = 0.0;
  for (const auto& s : samples) {
    const CVec2& eh = which == ErrorKind::current ? s.tilde_h : s.ddot_h;
    const CVec2& eg = which == ErrorKind::current ? s.tilde_g : s.ddot_g;
    acc += (eh.squaredNorm() + eg.squaredNorm()) / 4.0;
  }
  return acc / static_cast<double>(samples.size());
}

}  // namespace

NormalizedQuality normalize_quality(const Rational& alpha_raw, const Rational& beta_raw) {
  auto in_unit = [](const Rational& r) { return r >= 0 && r <= 1; };
  if (!in_unit(alpha_raw) || !in_unit(beta_raw)) {
    throw DomainError("quality exponents must lie in [0,1], got alpha=" + to_string(alpha_raw) +
                      " beta=" + to_string(beta_raw));
  }
  if (beta_raw < alpha_raw) return {{alpha_raw, alpha_raw}, true};
  return {{alpha_raw, beta_raw}, false};
}

ChannelSample draw_sample(RngStream& rng, double snr, const QualityPair& q) {
  if (!(snr > 1.0)) throw DomainError("draw_sample requires P > 1");
  const double current_var = std::pow(snr, -to_double(q.alpha));
  const double delayed_var = std::pow(snr, -to_double(q.beta));

  ChannelSample s;
  s.snr = snr;
  s.h = snap(gaussian_vector(rng, 1.0));
  s.g = snap(gaussian_vector(rng, 1.0));
  const CVec2 err_h = gaussian_vector(rng, current_var);
  const CVec2 err_g = gaussian_vector(rng, current_var);
  const CVec2 derr_h = gaussian_vector(rng, delayed_var);
  const CVec2 derr_g = gaussian_vector(rng, delayed_var);
  split_exact(s.h, err_h, s.hat_h, s.tilde_h);
  split_exact(s.g, err_g, s.hat_g, s.tilde_g);
  split_exact(s.h, derr_h, s.check_h, s.ddot_h);
  split_exact(s.g, derr_g, s.check_g, s.ddot_g);
  return s;
}

double measure_error_exponent(std::span<const ChannelSample> low, std::span<const ChannelSample> high,
                              ErrorKind which) {
  if (low.size() < kMinExponentSamples || high.size() < kMinExponentSamples) {
    throw EstimationError("error exponent needs >= 1000 samples per SNR, got " + std::to_string(low.size()) +
                          " and " + std::to_string(high.size()));
  }
  const double p1 = low.front().snr;
  const double p2 = high.front().snr;
  for (const auto& s : low) {
    if (s.snr != p1) throw EstimationError("low-SNR samples mix several SNR values");
  }
  for (const auto& s : high) {
    if (s.snr != p2) throw EstimationError("high-SNR samples mix several SNR values");
  }
  if (p2 / p1 < kMinSnrRatio) {
    throw EstimationError("error exponent needs the two SNRs >= 20 dB apart");
  }
  const double m1 = mean_error_power(low, which);
  const double m2 = mean_error_power(high, which);
  return -(std::log(m2) - std::log(m1)) / (std::log(p2) - std::log(p1));
}

}  // namespace dcsit
