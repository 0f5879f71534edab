#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace dcsit {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Integer numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

inline Rational make_rational(long long num, long long den = 1) { return Rational(num, den); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline bool is_integer(const Rational& r) { return denominator_of(r) == 1; }

/// Parses "p/q", an integer, or a terminating decimal with at most six
/// fractional digits. Decimals convert exactly ("0.75" -> 3/4).
/// Throws DomainError on malformed input.
Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& r);

/// Fixed-point rendering with `digits` fractional digits, rounded half away
/// from zero. Exact: no binary floating point is involved.
std::string to_decimal(const Rational& r, int digits = 12);

}  // namespace dcsit
