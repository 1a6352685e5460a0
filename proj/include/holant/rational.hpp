#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace holant {

// All verdict-relevant arithmetic in this library is exact. Rationals are
// GMP rationals kept in lowest terms; floating point never feeds a verdict.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rational(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational: zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Parses "p", "p/q" or "-p/q" (base 10). Rejects anything else.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_rational: empty string");
  mpq_t raw;
  mpq_init(raw);
  if (mpq_set_str(raw, text.c_str(), 10) != 0) {
    mpq_clear(raw);
    throw std::invalid_argument("parse_rational: malformed rational '" + text + "'");
  }
  if (mpz_sgn(mpq_denref(raw)) == 0) {
    mpq_clear(raw);
    throw std::invalid_argument("parse_rational: zero denominator in '" + text + "'");
  }
  mpq_canonicalize(raw);
  Rational r(raw);
  mpq_clear(raw);
  return r;
}

// Canonical text form: "p" when the denominator is 1, otherwise "p/q".
inline std::string to_string(const Rational& r) { return r.get_str(); }

inline std::string to_string(const Integer& z) { return z.get_str(); }

// Human-friendly decimal rendering, explicitly approximate.
inline std::string decimal_string(const Rational& r, int significant_digits = 6) {
  if (r == 0) return "0";
  mpf_class f(r, 256);
  mp_exp_t exp10 = 0;
  std::string digits = f.get_str(exp10, 10, significant_digits);
  bool negative = false;
  if (!digits.empty() && digits[0] == '-') {
    negative = true;
    digits.erase(digits.begin());
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  std::string mantissa = digits.substr(0, 1);
  if (digits.size() > 1) mantissa += "." + digits.substr(1);
  std::string out = (negative ? "-" : "") + mantissa;
  long e = static_cast<long>(exp10) - 1;
  if (e != 0) out += "e" + std::to_string(e);
  return out;
}

inline Rational pow2(long e) {
  Rational r = 1;
  if (e >= 0) {
    mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(e));
  } else {
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-e));
  }
  return r;
}

}  // namespace holant
