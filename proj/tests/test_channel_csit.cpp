#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "dcsit/channel_csit.hpp"
#include "dcsit/errors.hpp"
#include "dcsit/rng.hpp"

using namespace dcsit;

namespace {

bool bit_equal(const CVec2& a, const CVec2& b) { return std::memcmp(a.data(), b.data(), sizeof(Complex) * 2) == 0; }

std::vector<ChannelSample> draw_many(std::size_t n, double snr, const QualityPair& q, std::uint64_t seed) {
  std::vector<ChannelSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(derive_key({seed, i}));
    out.push_back(draw_sample(rng, snr, q));
  }
  return out;
}

}  // namespace

TEST_SUITE("channel_csit") {
  TEST_CASE("normalization keeps the canonical range") {
    const auto n = normalize_quality(Rational(1, 2), Rational(3, 4));
    CHECK_FALSE(n.clamped);
    CHECK(n.q == QualityPair{Rational(1, 2), Rational(3, 4)});
  }

  TEST_CASE("beta below alpha is lifted to alpha") {
    const auto n = normalize_quality(Rational(2, 3), Rational(1, 3));
    CHECK(n.clamped);
    CHECK(n.q == QualityPair{Rational(2, 3), Rational(2, 3)});
  }

  TEST_CASE("exponents outside the unit interval are rejected") {
    CHECK_THROWS_AS(normalize_quality(Rational(-1, 10), Rational(1, 2)), DomainError);
    CHECK_THROWS_AS(normalize_quality(Rational(1, 2), Rational(11, 10)), DomainError);
    CHECK_THROWS_AS(normalize_quality(Rational(3, 2), Rational(1)), DomainError);
  }

  TEST_CASE("estimate plus error reproduces the truth bit for bit") {
    const QualityPair q{Rational(1, 2), Rational(3, 4)};
    for (double db : {10.0, 40.0, 80.0}) {
      for (const auto& s : draw_many(500, db_to_linear(db), q, 3)) {
        CHECK(bit_equal(CVec2(s.hat_h + s.tilde_h), s.h));
        CHECK(bit_equal(CVec2(s.hat_g + s.tilde_g), s.g));
        CHECK(bit_equal(CVec2(s.check_h + s.ddot_h), s.h));
        CHECK(bit_equal(CVec2(s.check_g + s.ddot_g), s.g));
      }
    }
  }

  TEST_CASE("error variances follow P^-alpha and P^-beta") {
    // Oracle: per-entry sample variance against the commanded variance.
    const QualityPair q{Rational(1, 2), Rational(3, 4)};
    const double snr = db_to_linear(40.0);
    const auto samples = draw_many(20000, snr, q, 5);
    double cur = 0.0, del = 0.0, truth = 0.0;
    for (const auto& s : samples) {
      cur += (s.tilde_h.squaredNorm() + s.tilde_g.squaredNorm()) / 4.0;
      del += (s.ddot_h.squaredNorm() + s.ddot_g.squaredNorm()) / 4.0;
      truth += (s.h.squaredNorm() + s.g.squaredNorm()) / 4.0;
    }
    const double n = static_cast<double>(samples.size());
    CHECK(cur / n == doctest::Approx(std::pow(snr, -0.5)).epsilon(0.03));
    CHECK(del / n == doctest::Approx(std::pow(snr, -0.75)).epsilon(0.03));
    CHECK(truth / n == doctest::Approx(1.0).epsilon(0.03));
  }

  TEST_CASE("current and delayed errors are uncorrelated") {
    const QualityPair q{Rational(1, 4), Rational(1, 2)};
    const auto samples = draw_many(20000, db_to_linear(30.0), q, 8);
    Complex cross{};
    double pa = 0.0, pb = 0.0;
    for (const auto& s : samples) {
      cross += s.tilde_h(0) * std::conj(s.ddot_h(0));
      pa += std::norm(s.tilde_h(0));
      pb += std::norm(s.ddot_h(0));
    }
    CHECK(std::abs(cross) / std::sqrt(pa * pb) < 0.03);
  }

  TEST_CASE("fitted error exponents") {
    const QualityPair q{Rational(1, 2), Rational(3, 4)};
    const auto low = draw_many(4000, db_to_linear(20.0), q, 11);
    const auto high = draw_many(4000, db_to_linear(60.0), q, 12);
    CHECK(measure_error_exponent(low, high, ErrorKind::current) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(measure_error_exponent(low, high, ErrorKind::delayed) == doctest::Approx(0.75).epsilon(0.05));
  }

  TEST_CASE("exponent measurement preconditions") {
    const QualityPair q{Rational(0), Rational(1)};
    const auto few = draw_many(999, db_to_linear(20.0), q, 1);
    const auto low = draw_many(1000, db_to_linear(20.0), q, 2);
    const auto close = draw_many(1000, db_to_linear(30.0), q, 3);
    const auto high = draw_many(1000, db_to_linear(40.0), q, 4);
    CHECK_THROWS_AS(measure_error_exponent(few, high, ErrorKind::current), EstimationError);
    CHECK_THROWS_AS(measure_error_exponent(low, close, ErrorKind::current), EstimationError);
    auto mixed = low;
    mixed.back() = high.front();
    CHECK_THROWS_AS(measure_error_exponent(mixed, high, ErrorKind::delayed), EstimationError);
    CHECK_NOTHROW(measure_error_exponent(low, high, ErrorKind::delayed));
  }

  TEST_CASE("draw_sample requires P > 1") {
    RngStream rng(1);
    const QualityPair q{Rational(0), Rational(1)};
    CHECK_THROWS_AS(draw_sample(rng, 1.0, q), DomainError);
    CHECK_THROWS_AS(draw_sample(rng, 0.5, q), DomainError);
  }

  TEST_CASE("streams are reproducible and keyed") {
    RngStream a(derive_key({1, 2, 3}));
    RngStream b(derive_key({1, 2, 3}));
    RngStream c(derive_key({1, 2, 4}));
    bool differs = false;
    for (int i = 0; i < 16; ++i) {
      const auto x = a();
      CHECK(x == b());
      differs = differs || x != c();
    }
    CHECK(differs);
    CHECK(derive_key({1, 2}) != derive_key({2, 1}));
  }

  TEST_CASE("complex gaussian variance") {
    RngStream rng(99);
    double acc = 0.0;
    Complex mean{};
    for (int i = 0; i < 50000; ++i) {
      const Complex z = rng.complex_gaussian(2.0);
      acc += std::norm(z);
      mean += z;
    }
    CHECK(acc / 50000.0 == doctest::Approx(2.0).epsilon(0.03));
    CHECK(std::abs(mean / 50000.0) < 0.03);
  }
}
