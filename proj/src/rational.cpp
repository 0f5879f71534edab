#include "dcsit/rational.hpp"

#include <cctype>

#include "dcsit/errors.hpp"

namespace dcsit {
namespace {

constexpr int kMaxFractionalDigits = 6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

Integer parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) {
    throw DomainError("malformed rational '" + std::string(whole) + "'");
  }
  Integer value(std::string{s});
  return negative ? Integer(-value) : value;
}

Integer pow10(int n) {
  Integer p = 1;
  for (int i = 0; i < n; ++i) p *= 10;
  return p;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw DomainError("empty rational");

  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const Integer num = parse_integer(trim(s.substr(0, slash)), s);
    const Integer den = parse_integer(trim(s.substr(slash + 1)), s);
    if (den == 0) throw DomainError("zero denominator in '" + std::string(s) + "'");
    return Rational(num, den);
  }

  std::string_view body = s;
  bool negative = false;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto dot = body.find('.');
  if (dot == std::string_view::npos) {
    if (!all_digits(body)) throw DomainError("malformed rational '" + std::string(s) + "'");
    const Integer value(std::string{body});
    return Rational(negative ? Integer(-value) : value);
  }
  std::string_view int_part = body.substr(0, dot);
  std::string_view frac_part = body.substr(dot + 1);
  if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part))) {
    throw DomainError("malformed decimal '" + std::string(s) + "'");
  }
  if (static_cast<int>(frac_part.size()) > kMaxFractionalDigits) {
    throw DomainError("decimal '" + std::string(s) + "' has more than 6 fractional digits; pass it as p/q");
  }
  const Integer scale = pow10(static_cast<int>(frac_part.size()));
  Integer num = int_part.empty() ? Integer(0) : Integer(std::string{int_part});
  num *= scale;
  if (!frac_part.empty()) num += Integer(std::string{frac_part});
  if (negative) num = -num;
  return Rational(num, scale);
}

std::string to_string(const Rational& r) {
  if (is_integer(r)) return numerator_of(r).str();
  return numerator_of(r).str() + "/" + denominator_of(r).str();
}

std::string to_decimal(const Rational& r, int digits) {
  const Integer num = numerator_of(r);
  const Integer den = denominator_of(r);
  const bool negative = num < 0;
  const Integer scaled = (negative ? Integer(-num) : num) * pow10(digits);
  Integer q = scaled / den;
  const Integer rem = scaled % den;
  if (2 * rem >= den) ++q;

  std::string units = q.str();
  if (static_cast<int>(units.size()) <= digits) {
    units.insert(0, static_cast<std::size_t>(digits + 1) - units.size(), '0');
  }
  std::string out = units.substr(0, units.size() - static_cast<std::size_t>(digits));
  if (digits > 0) out += "." + units.substr(units.size() - static_cast<std::size_t>(digits));
  if (negative && q != 0) out.insert(0, 1, '-');
  return out;
}

}  // namespace dcsit
