#include "doctest.h"

#include <cmath>
#include <cstring>
#include <numeric>

#include "dcsit/errors.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/rng.hpp"
#include "dcsit/tx_chain.hpp"

using namespace dcsit;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n, d); }

CVec2 vec(Complex a, Complex b) {
  CVec2 v;
  v << a, b;
  return v;
}

std::vector<Complex> gaussian_batch(std::size_t n, double variance, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<Complex> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.complex_gaussian(variance));
  return out;
}

double mse(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

bool bit_equal(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(Complex)) == 0;
}

}  // namespace

TEST_SUITE("tx_chain") {
  TEST_CASE("orthogonal beam nulls the estimate") {
    RngStream rng(4);
    for (int i = 0; i < 200; ++i) {
      const CVec2 e = vec(rng.complex_gaussian(1.0), rng.complex_gaussian(1.0));
      const CVec2 u = orthogonal_beam(e);
      CHECK(std::abs(effective_gain(e, u)) < 1e-14 * e.norm());
      CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(u(0).imag() == 0.0);
      CHECK(u(0).real() > 0.0);
    }
  }

  TEST_CASE("orthogonal beam with a zero first entry of the result") {
    const CVec2 u = orthogonal_beam(vec({2.0, 1.0}, 0.0));
    CHECK(std::abs(u(0)) == 0.0);
    CHECK(u(1) == Complex(1.0, 0.0));
  }

  TEST_CASE("orthogonal beam rejects a zero estimate") {
    CHECK_THROWS_AS(orthogonal_beam(CVec2::Zero()), DegenerateInputError);
  }

  TEST_CASE("beamformers are unit norm, null the right users and are reproducible") {
    const CsitView view{vec({0.3, -1.0}, {0.7, 0.2}), vec({-0.4, 0.1}, {1.2, 0.5})};
    const BeamformerSet a = build_beamformers(view, 42, 7);
    const BeamformerSet b = build_beamformers(view, 42, 7);
    const BeamformerSet c = build_beamformers(view, 43, 7);
    for (const CVec2* v : {&a.w, &a.u, &a.u_prime, &a.v, &a.v_prime}) CHECK(v->norm() == doctest::Approx(1.0));
    CHECK(std::abs(effective_gain(view.hat_g, a.u)) < 1e-14);
    CHECK(std::abs(effective_gain(view.hat_h, a.v)) < 1e-14);
    CHECK(a.w == b.w);
    CHECK(a.v_prime == b.v_prime);
    CHECK(a.w != c.w);
  }

  TEST_CASE("stream powers follow the exponents") {
    const PhasePlan p = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    const StreamPowers pw = stream_powers(p.phases[0], 1e4);
    CHECK(pw.c == doctest::Approx(1e4));
    CHECK(pw.a == doctest::Approx(1e3));
    CHECK(pw.a_prime == doctest::Approx(10.0));
    CHECK(pw.b == doctest::Approx(1e3));
    const StreamPowers last = stream_powers(p.phases.back(), 1e4);
    CHECK(last.a == doctest::Approx(100.0));
    CHECK(last.a_prime == 0.0);
  }

  TEST_CASE("symbol sample powers") {
    const PhasePlan p = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    RngStream rng(3);
    double pc = 0.0, pa = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const SymbolBlock s = draw_symbols(rng, p.phases[0], 1e4);
      pc += std::norm(*s.c);
      pa += std::norm(*s.a_prime);
    }
    CHECK(pc / 20000 == doctest::Approx(1e4).epsilon(0.03));
    CHECK(pa / 20000 == doctest::Approx(10.0).epsilon(0.03));
  }

  TEST_CASE("transmit vector is the superposition") {
    const PhasePlan p = plan_x1({R(1, 2), R(3, 4)}, 4, Integer(1));
    const CsitView view{vec(1.0, {0.0, 1.0}), vec({0.5, 0.5}, -1.0)};
    const BeamformerSet bf = build_beamformers(view, 1, 1);
    SymbolBlock sym;
    sym.c = Complex(1, 2);
    sym.a = Complex(-1, 0);
    sym.a_prime = Complex(0, 3);
    sym.b = Complex(2, 2);
    sym.b_prime = Complex(0.5, -1);
    const CVec2 x = transmit_slot(p.phases[0], bf, sym);
    const CVec2 expect = bf.w * *sym.c + bf.u * *sym.a + bf.u_prime * *sym.a_prime + bf.v * *sym.b +
                         bf.v_prime * *sym.b_prime;
    CHECK((x - expect).norm() < 1e-12);
    SymbolBlock missing = sym;
    missing.b_prime.reset();
    CHECK_THROWS_AS(transmit_slot(p.phases[0], bf, missing), MismatchError);
    CHECK_THROWS_AS(transmit_slot(p.phases.back(), bf, sym), MismatchError);
  }

  TEST_CASE("delayed interference by hand") {
    ChannelSample s;
    s.h = vec(1.0, 2.0);
    s.g = vec({0, 1}, 1.0);
    s.check_h = vec(1.0, 1.5);
    s.check_g = vec({0, 1}, 0.5);
    BeamformerSet bf;
    bf.w = vec(1, 0);
    bf.u = vec(1, 0);
    bf.u_prime = vec(0, 1);
    bf.v = vec(0, 1);
    bf.v_prime = vec(1, 0);
    SymbolBlock sym;
    sym.a = 2.0;
    sym.a_prime = 3.0;
    sym.b = 5.0;
    sym.b_prime = 7.0;
    const InterferenceRecord r = delayed_interference(s, bf, sym);
    CHECK(r.iota1 == Complex(1.0 * 7 + 2.0 * 5));
    CHECK(r.check_iota1 == Complex(1.0 * 7 + 1.5 * 5));
    CHECK(r.iota2 == Complex(0, 2) + Complex(3));
    CHECK(r.check_iota2 == Complex(0, 2) + Complex(1.5));
    CHECK(r.qbar_iota1 == Complex{});
    CHECK(r.bits_used == 0);
  }

  TEST_CASE("bit budget") {
    const QualityPair q{R(1, 2), R(3, 4)};
    CHECK(interference_bits(q, db_to_linear(40.0), 4) == 8);  // 0.25 * 13.29 -> 4
    CHECK(interference_bits(q, db_to_linear(80.0), 4) == 11);
    CHECK(interference_bits(q, 16.0, 0) == 2);  // exactly 1 bit, floored at 2
    CHECK(interference_bits({0, 0}, 1e6, 0) == 2);
  }

  TEST_CASE("all-zero batch quantizes to zero") {
    const std::vector<Complex> zeros(10);
    const QuantizedBatch b = quantize_interference(zeros, 6);
    CHECK(b.header.count == 10);
    CHECK(b.bits.size() == 60);
    for (const auto& v : b.values) CHECK(v == Complex{});
    CHECK(mse(zeros, b.values) == 0.0);
  }

  TEST_CASE("bit split and count") {
    const auto x = gaussian_batch(7, 1.0, 1);
    const QuantizedBatch odd = quantize_interference(x, 9);
    CHECK(odd.header.bits_real == 5);
    CHECK(odd.header.bits_imag == 4);
    CHECK(odd.bits.size() == 63);
    const QuantizedBatch even = quantize_interference(x, 8);
    CHECK(even.header.bits_real == 4);
    CHECK(even.header.bits_imag == 4);
    for (auto bit : odd.bits) CHECK(bit <= 1);
  }

  TEST_CASE("clipping range and nominal distortion") {
    const std::vector<Complex> x{{3, 0}, {0, 4}, {-3, 0}, {0, -4}};  // per-dimension second moment 25/4
    const QuantizedBatch b = quantize_interference(x, 4);
    CHECK(b.header.clip_range == doctest::Approx(4.0 * 2.5));
    const double d = 2.0 * b.header.clip_range / 4.0;  // 2 bits per dimension
    CHECK(b.header.nominal_distortion() == doctest::Approx(2.0 * d * d / 12.0));
  }

  TEST_CASE("quantize then dequantize is exact") {
    const auto x = gaussian_batch(500, 30.0, 2);
    for (int bits : {2, 3, 8, 13, 40}) {
      const QuantizedBatch b = quantize_interference(x, bits);
      CHECK(bit_equal(dequantize(b.bits, b.header), b.values));
    }
  }

  TEST_CASE("MSE stays below variance * 2^-B * K") {
    // Granular error per dimension is step^2 / 12 with step = 8 sigma / 2^b.
    // Averaging the two dimensions with the odd bit on the real part gives
    // K <= 64 * 2.5 / 24 ~ 6.7; allow 8 for clipping.
    const auto x = gaussian_batch(20000, 5.0, 3);
    double var = 0.0;
    for (const auto& v : x) var += std::norm(v);
    var /= static_cast<double>(x.size());
    for (int bits = 4; bits <= 16; ++bits) {
      CAPTURE(bits);
      const QuantizedBatch b = quantize_interference(x, bits);
      CHECK(mse(x, b.values) <= var * std::ldexp(1.0, -bits) * 8.0);
    }
  }

  TEST_CASE("MSE is scale invariant") {
    const auto x = gaussian_batch(5000, 1.0, 9);
    std::vector<Complex> y;
    for (const auto& v : x) y.push_back(v * 1000.0);
    const double m1 = mse(x, quantize_interference(x, 10).values);
    const double m2 = mse(y, quantize_interference(y, 10).values);
    CHECK(m2 / m1 == doctest::Approx(1e6).epsilon(1e-9));
  }

  TEST_CASE("quantizer preconditions") {
    const std::vector<Complex> empty;
    const auto x = gaussian_batch(3, 1.0, 4);
    CHECK_THROWS_AS(quantize_interference(empty, 4), DomainError);
    CHECK_THROWS_AS(quantize_interference(x, 1), DomainError);
  }

  TEST_CASE("dequantize rejects a wrong bit count") {
    const auto x = gaussian_batch(4, 1.0, 5);
    QuantizedBatch b = quantize_interference(x, 6);
    b.bits.pop_back();
    CHECK_THROWS_AS(dequantize(b.bits, b.header), IntegrityError);
  }

  TEST_CASE("packing spreads bits evenly, longer payloads first") {
    BitString bits(23);
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>(i % 3 == 0);
    const auto payloads = pack_common(bits, 5);
    REQUIRE(payloads.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(payloads[i].size() == (i < 3 ? 5u : 4u));
    CHECK(unpack_common(payloads) == bits);
    CHECK(pack_common(BitString{}, 3) == std::vector<BitString>(3));
    CHECK_THROWS_AS(pack_common(bits, 0), DomainError);
  }
}
