#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <optional>
#include <string>

#include "qstl/errors.hpp"

namespace qstl {

// Exact arbitrary-precision scalars. mpq_class keeps values canonicalized
// (lowest terms, positive denominator), which is exactly the Rational
// contract we need; Int is the matching integer type.
using Int = mpz_class;
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline bool is_integer(const Rational& q) {
  return mpz_cmp_ui(q.get_den().get_mpz_t(), 1) == 0;
}

inline Int floor_int(const Rational& q) {
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

inline Int ceil_int(const Rational& q) {
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

inline Rational abs_rat(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// 2^e as a rational, e may be negative.
inline Rational pow2(long e) {
  Rational r(1);
  if (e >= 0) {
    mpz_ui_pow_ui(mpq_numref(r.get_mpq_t()), 2, static_cast<unsigned long>(e));
  } else {
    mpz_ui_pow_ui(mpq_denref(r.get_mpq_t()), 2, static_cast<unsigned long>(-e));
  }
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

// Parses "p", "p/q", or a decimal like "-0.25"; returns nullopt on garbage.
inline std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+") return std::nullopt;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      char c = digits[i];
      if (!(std::isdigit(static_cast<unsigned char>(c)) ||
            (i == 0 && (c == '-' || c == '+'))))
        return std::nullopt;
    }
    Rational r;
    if (mpq_set_str(r.get_mpq_t(), digits.c_str(), 10) != 0)
      return std::nullopt;
    Int den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    r /= Rational(den);
    r.canonicalize();
    return r;
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' ||
          (i == 0 && (c == '-' || c == '+'))))
      return std::nullopt;
  }
  Rational r;
  if (mpq_set_str(r.get_mpq_t(), text.c_str(), 10) != 0) return std::nullopt;
  if (r.get_den() == 0) return std::nullopt;
  r.canonicalize();
  return r;
}

// Certification effort knobs shared across the project. All certified
// decisions start at start_bits and escalate by doubling up to cap_bits;
// a decision still open at the cap surfaces as Undetermined or
// PrecisionExhausted rather than silent nontermination.
struct CertSettings {
  long start_bits = 64;
  long cap_bits = 4096;

  long next(long bits) const {
    long n = bits * 2;
    return n > cap_bits ? cap_bits : n;
  }
};

}  // namespace qstl
