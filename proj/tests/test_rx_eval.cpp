#include "doctest.h"

#include <cmath>

#include "dcsit/errors.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/rx_eval.hpp"
#include "dcsit/sim_harness.hpp"

using namespace dcsit;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n, d); }

// log2 det(N + H D H^H) - log2 det(N), expanded by hand.
double det_oracle(const Complex H[2][2], const double p[2], const Complex N[2][2]) {
  Complex G[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) G[i][j] = H[i][0] * p[0] * std::conj(H[j][0]) + H[i][1] * p[1] * std::conj(H[j][1]);
  auto det = [](Complex a, Complex b, Complex c, Complex d) { return a * d - b * c; };
  const Complex num = det(N[0][0] + G[0][0], N[0][1] + G[0][1], N[1][0] + G[1][0], N[1][1] + G[1][1]);
  const Complex den = det(N[0][0], N[0][1], N[1][0], N[1][1]);
  return std::log2(std::abs(num)) - std::log2(std::abs(den));
}

}  // namespace

TEST_SUITE("rx_eval") {
  TEST_CASE("siso rate") {
    CHECK(siso_rate(3.0, 0.0) == doctest::Approx(2.0));
    CHECK(siso_rate(6.0, 1.0) == doctest::Approx(2.0));
    CHECK(siso_rate(0.0, 5.0) == 0.0);
  }

  TEST_CASE("MIMO rate against a hand-expanded determinant") {
    RngStream rng(12);
    for (int k = 0; k < 100; ++k) {
      EquivalentMimo m;
      Complex H[2][2];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.channel(i, j) = H[i][j] = rng.complex_gaussian(1.0);
      const double p[2] = {std::exp(rng.standard_normal() * 2), std::exp(rng.standard_normal() * 2)};
      m.signal_powers = {p[0], p[1]};
      const double n0 = 0.1 + std::abs(rng.standard_normal());
      const double n1 = 0.1 + std::abs(rng.standard_normal());
      const Complex N[2][2] = {{n0, 0}, {0, n1}};
      m.noise_cov = Eigen::Matrix2cd::Zero();
      m.noise_cov(0, 0) = n0;
      m.noise_cov(1, 1) = n1;
      const MimoRate r = mimo_private_rate(m);
      CHECK_FALSE(r.regularized);
      CHECK(r.bits == doctest::Approx(det_oracle(H, p, N)).epsilon(1e-9));
    }
  }

  TEST_CASE("identity channel splits into two scalar links") {
    EquivalentMimo m;
    m.channel = Eigen::Matrix2cd::Identity();
    m.signal_powers = {3.0, 15.0};
    m.noise_cov = Eigen::Matrix2cd::Identity();
    CHECK(mimo_private_rate(m).bits == doctest::Approx(2.0 + 4.0));
  }

  TEST_CASE("singular noise covariance is loaded and flagged") {
    EquivalentMimo m;
    m.channel = Eigen::Matrix2cd::Identity();
    m.signal_powers = {1.0, 1.0};
    m.noise_cov = Eigen::Matrix2cd::Zero();
    m.noise_cov(0, 0) = 1.0;
    const MimoRate r = mimo_private_rate(m);
    CHECK(r.regularized);
    CHECK(r.bits == doctest::Approx(1.0 + std::log2(1.0 + 1e12)).epsilon(1e-6));
  }

  TEST_CASE("common rate treats every other stream as noise") {
    ChannelSample s;
    s.h << 1.0, 0.0;
    s.g << 0.0, 1.0;
    s.snr = 100.0;
    BeamformerSet bf;
    bf.w << 1.0, 1.0;  // not unit norm on purpose: gains are read from the beams
    bf.u << 1.0, 0.0;
    bf.v << 0.0, 1.0;
    bf.u_prime << 0.0, 1.0;
    bf.v_prime << 1.0, 0.0;
    PhaseSpec spec;
    spec.duration = 1;
    spec.c = StreamSpec{R(1, 2), 1};
    spec.a = StreamSpec{R(1, 2), R(1, 2)};
    spec.b = StreamSpec{R(1, 2), R(1, 2)};
    const CommonRate r = common_rate(s, spec, bf);
    // user 1 sees c at 100 and a at 10; b is nulled
    CHECK(r.user1 == doctest::Approx(std::log2(1.0 + 100.0 / 11.0)));
    CHECK(r.user2 == doctest::Approx(std::log2(1.0 + 100.0 / 11.0)));
    PhaseSpec none = spec;
    none.c.reset();
    CHECK_THROWS_AS(common_rate(s, none, bf), DomainError);
  }

  TEST_CASE("deliverable common rate is the min of the means") {
    const std::vector<CommonRate> slots{{1.0, 4.0}, {3.0, 0.0}};
    CHECK(deliverable_common_rate(slots) == doctest::Approx(2.0));
    CHECK(deliverable_common_rate({}) == 0.0);
  }

  TEST_CASE("equivalent MIMO rows and noise") {
    ChannelSample s;
    s.h << 1.0, 2.0;
    s.check_g << 0.5, -1.0;
    s.ddot_h << 0.1, 0.0;
    s.g << 3.0, 1.0;
    s.check_h << 1.0, 1.9;
    s.ddot_g << 0.0, 0.2;
    BeamformerSet bf;
    bf.u << 1.0, 0.0;
    bf.u_prime << 0.0, 1.0;
    bf.v << 1.0, 0.0;
    bf.v_prime << 0.0, 1.0;
    bf.w << 1.0, 0.0;
    StreamPowers pw{1000.0, 100.0, 10.0, 100.0, 10.0};
    const EquivalentMimo m1 = user1_equivalent_mimo(s, bf, pw, 0.3, 0.4);
    CHECK(m1.channel(0, 0) == Complex(1.0));
    CHECK(m1.channel(0, 1) == Complex(2.0));
    CHECK(m1.channel(1, 0) == Complex(0.5));
    CHECK(m1.channel(1, 1) == Complex(-1.0));
    CHECK(m1.signal_powers[0] == 100.0);
    CHECK(m1.noise_cov(0, 0).real() == doctest::Approx(0.01 * 100.0 + 1.0 + 0.3));
    CHECK(m1.noise_cov(1, 1).real() == doctest::Approx(0.4));
    CHECK(m1.noise_cov(0, 1) == Complex{});
    const EquivalentMimo m2 = user2_equivalent_mimo(s, bf, pw, 0.3, 0.4);
    CHECK(m2.channel(0, 1) == Complex(1.9));
    CHECK(m2.channel(1, 0) == Complex(3.0));
    CHECK(m2.noise_cov(0, 0).real() == doctest::Approx(0.4));
    CHECK(m2.noise_cov(1, 1).real() == doctest::Approx(0.04 * 10.0 + 1.0 + 0.3));
  }

  TEST_CASE("backward decoding recovers the fed-forward interference") {
    const PhasePlan plan = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    const double snr = db_to_linear(40.0);
    const TrialRecord rec = simulate_x1_trial(plan, snr, {9, 0, 0}, 8);
    const auto dec = backward_decode_chain(rec);
    REQUIRE(dec.size() == 3);
    for (std::size_t s = 0; s < dec.size(); ++s) {
      const auto& ph = rec.phases[s];
      double r1 = 0.0, r2 = 0.0;
      for (const auto& slot : ph.slots) {
        r1 += std::norm(slot.interference.iota1 - slot.interference.qbar_iota1);
        r2 += std::norm(slot.interference.iota2 - slot.interference.qbar_iota2);
      }
      const double T = static_cast<double>(ph.slots.size());
      CHECK(dec[s].residual_power1 == doctest::Approx(r1 / T).epsilon(1e-6));
      CHECK(dec[s].residual_power2 == doctest::Approx(r2 / T).epsilon(1e-6));
      CHECK(dec[s].mimo_user1.size() == ph.slots.size());
    }
  }

  TEST_CASE("fine quantization leaves only the delayed-CSIT residual") {
    const PhasePlan plan = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    const TrialRecord rec = simulate_x1_trial(plan, db_to_linear(60.0), {3, 1, 2}, 48);
    const auto dec = backward_decode_chain(rec);
    for (std::size_t s = 0; s < dec.size(); ++s) {
      double r1 = 0.0;
      for (const auto& slot : rec.phases[s].slots) r1 += std::norm(slot.interference.iota1 - slot.interference.check_iota1);
      r1 /= static_cast<double>(rec.phases[s].slots.size());
      CHECK(dec[s].residual_power1 == doctest::Approx(r1).epsilon(1e-3));
    }
  }

  TEST_CASE("a flipped payload bit is caught") {
    const PhasePlan plan = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    TrialRecord rec = simulate_x1_trial(plan, db_to_linear(40.0), {1, 0, 0}, 8);
    rec.phases[2].carried_payload[1][3] ^= 1;
    CHECK_THROWS_AS(backward_decode_chain(rec), IntegrityError);
  }

  TEST_CASE("a truncated payload is caught") {
    const PhasePlan plan = plan_x1({0, R(1, 3)}, 3, Integer(3));
    TrialRecord rec = simulate_x1_trial(plan, db_to_linear(40.0), {1, 0, 0}, 8);
    rec.phases[1].carried_payload.back().pop_back();
    CHECK_THROWS_AS(backward_decode_chain(rec), IntegrityError);
  }

  TEST_CASE("payloads match the planned budget") {
    const PhasePlan plan = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    const TrialRecord rec = simulate_x1_trial(plan, db_to_linear(40.0), {1, 0, 0}, 8);
    for (std::size_t s = 1; s < rec.phases.size(); ++s) {
      std::size_t bits = 0;
      for (const auto& p : rec.phases[s].carried_payload) bits += p.size();
      CHECK(bits == rec.phases[s - 1].slots.size() * 2 * 8);
      CHECK(rec.phases[s].carried_payload.size() == rec.phases[s].slots.size());
    }
  }
}
