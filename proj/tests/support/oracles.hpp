#pragma once

// Test-side oracles, kept independent of the library's evaluation paths:
// plain series/long-division/matrix arithmetic, no interval machinery.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qstl/bigfloat.hpp"
#include "qstl/rational.hpp"

namespace oracles {

using qstl::BigFloat;
using qstl::Int;
using qstl::Rational;

// Digit-by-digit square root: rational bounds l, u with l <= sqrt(q) <= u and
// u - l <= 2^-bits, via integer isqrt of q scaled by 4^k.
inline std::pair<Rational, Rational> sqrt_bounds(const Rational& q, long bits) {
  Int num = q.get_num(), den = q.get_den();
  // sqrt(num/den) = sqrt(num*den)/den
  Int m = num * den;
  Int scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 4, static_cast<unsigned long>(bits + 2));
  Int s;
  mpz_sqrt(s.get_mpz_t(), Int(m * scale).get_mpz_t());
  Int denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), 2, static_cast<unsigned long>(bits + 2));
  Rational lo = Rational(s) / (Rational(denom) * Rational(den));
  Rational hi = Rational(s + 1) / (Rational(denom) * Rational(den));
  return {lo, hi};
}

// Alternating/absolute Taylor bounds for exp(q) at rational q with |q| <= 2:
// partial sums in exact rational arithmetic plus a geometric tail bound.
inline std::pair<Rational, Rational> exp_bounds(const Rational& q, int terms = 40) {
  Rational sum(0), term(1);
  for (int k = 1; k <= terms; ++k) {
    sum += term;
    term = term * q / Rational(k);
  }
  // |tail| <= |term| * sum_{j>=0} (|q|/(terms+1))^j, valid since |q| <= 2 < terms
  Rational aq = qstl::abs_rat(q);
  Rational ratio = aq / Rational(terms + 1);
  Rational tail = qstl::abs_rat(term) / (Rational(1) - ratio);
  return {sum - tail, sum + tail};
}

inline std::pair<Rational, Rational> cos_bounds(const Rational& q, int terms = 30) {
  Rational sum(0), term(1);  // (-1)^k q^(2k)/(2k)!
  for (int k = 0; k < terms; ++k) {
    sum += term;
    term = term * (-q * q) / Rational((2 * k + 1) * (2 * k + 2));
  }
  Rational tail = qstl::abs_rat(term) * 2;
  return {sum - tail, sum + tail};
}

inline std::pair<Rational, Rational> sin_bounds(const Rational& q, int terms = 30) {
  Rational sum(0), term = q;
  for (int k = 0; k < terms; ++k) {
    sum += term;
    term = term * (-q * q) / Rational((2 * k + 2) * (2 * k + 3));
  }
  Rational tail = qstl::abs_rat(term) * 2;
  return {sum - tail, sum + tail};
}

// ln 2 from the series sum 1/(k 2^k).
inline std::pair<Rational, Rational> ln2_bounds(int terms = 80) {
  Rational sum(0);
  Rational p(1);
  for (int k = 1; k <= terms; ++k) {
    p /= 2;
    sum += p / Rational(k);
  }
  Rational tail = qstl::pow2(-terms);  // sum_{k>terms} 1/(k 2^k) < 2^-terms
  return {sum, sum + tail};
}

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

// Real-matrix exponential row x(0)^T exp(Q t) by plain Taylor scaling and
// squaring in BigFloat round-to-nearest; bits >> target accuracy.
inline std::vector<Rational> ctmc_occupancies(const std::vector<std::vector<Rational>>& q,
                                              const std::vector<Rational>& x0,
                                              const Rational& t, long bits = 192) {
  long n = static_cast<long>(q.size());
  auto idx = [n](long i, long j) { return static_cast<std::size_t>(i * n + j); };
  std::vector<BigFloat> a(static_cast<std::size_t>(n * n));
  // scale so that ||Q t / 2^s|| is small
  Rational norm(0);
  for (long i = 0; i < n; ++i) {
    Rational row(0);
    for (long j = 0; j < n; ++j) row += qstl::abs_rat(q[i][j]);
    if (row > norm) norm = row;
  }
  long s = 0;
  Rational scaled = norm * qstl::abs_rat(t);
  while (scaled > Rational(1, 4)) {
    scaled /= 2;
    ++s;
  }
  Rational factor = t / qstl::pow2(s);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      a[idx(i, j)] = BigFloat::from_rat(q[i][j] * factor, bits, MPFR_RNDN);
  // exp(A) by Taylor
  std::vector<BigFloat> acc(static_cast<std::size_t>(n * n)), term(static_cast<std::size_t>(n * n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      acc[idx(i, j)] = BigFloat::from_long(i == j ? 1 : 0, bits);
      term[idx(i, j)] = acc[idx(i, j)];
    }
  long terms = bits / 2 + 16;
  for (long k = 1; k <= terms; ++k) {
    std::vector<BigFloat> nt(static_cast<std::size_t>(n * n), BigFloat::from_long(0, bits));
    BigFloat inv_k = bf_div(BigFloat::from_long(1, bits), BigFloat::from_long(k, bits), bits, MPFR_RNDN);
    for (long i = 0; i < n; ++i)
      for (long l = 0; l < n; ++l) {
        BigFloat x = bf_mul(term[idx(i, l)], inv_k, bits, MPFR_RNDN);
        if (x.is_zero()) continue;
        for (long j = 0; j < n; ++j)
          nt[idx(i, j)] = bf_add(nt[idx(i, j)], bf_mul(x, a[idx(l, j)], bits, MPFR_RNDN), bits, MPFR_RNDN);
      }
    term.swap(nt);
    for (std::size_t z = 0; z < acc.size(); ++z)
      acc[z] = bf_add(acc[z], term[z], bits, MPFR_RNDN);
  }
  for (long r = 0; r < s; ++r) {
    std::vector<BigFloat> sq(static_cast<std::size_t>(n * n), BigFloat::from_long(0, bits));
    for (long i = 0; i < n; ++i)
      for (long l = 0; l < n; ++l)
        for (long j = 0; j < n; ++j)
          sq[idx(i, j)] = bf_add(sq[idx(i, j)], bf_mul(acc[idx(i, l)], acc[idx(l, j)], bits, MPFR_RNDN), bits, MPFR_RNDN);
    acc.swap(sq);
  }
  std::vector<Rational> out(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    BigFloat v = BigFloat::from_long(0, bits);
    for (long i = 0; i < n; ++i)
      v = bf_add(v, bf_mul(BigFloat::from_rat(x0[static_cast<std::size_t>(i)], bits, MPFR_RNDN), acc[idx(i, j)], bits, MPFR_RNDN), bits, MPFR_RNDN);
    out[static_cast<std::size_t>(j)] = v.to_rat();
  }
  return out;
}

// Complex-double expm action for spot checks of closed forms.
inline std::vector<std::complex<double>> expm_action_double(
    const std::vector<std::complex<double>>& m, const std::vector<std::complex<double>>& v,
    double t) {
  long n = static_cast<long>(v.size());
  auto idx = [n](long i, long j) { return static_cast<std::size_t>(i * n + j); };
  int s = 10;
  double scale = t / std::pow(2.0, s);
  std::vector<std::complex<double>> acc(static_cast<std::size_t>(n * n), 0.0),
      term(static_cast<std::size_t>(n * n), 0.0);
  for (long i = 0; i < n; ++i) acc[idx(i, i)] = term[idx(i, i)] = 1.0;
  for (int k = 1; k <= 30; ++k) {
    std::vector<std::complex<double>> nt(static_cast<std::size_t>(n * n), 0.0);
    for (long i = 0; i < n; ++i)
      for (long l = 0; l < n; ++l) {
        std::complex<double> x = term[idx(i, l)] * (scale / double(k));
        if (x == std::complex<double>(0.0)) continue;
        for (long j = 0; j < n; ++j) nt[idx(i, j)] += x * m[idx(l, j)];
      }
    term.swap(nt);
    for (std::size_t z = 0; z < acc.size(); ++z) acc[z] += term[z];
  }
  for (int r = 0; r < s; ++r) {
    std::vector<std::complex<double>> sq(static_cast<std::size_t>(n * n), 0.0);
    for (long i = 0; i < n; ++i)
      for (long l = 0; l < n; ++l) {
        std::complex<double> x = acc[idx(i, l)];
        if (x == std::complex<double>(0.0)) continue;
        for (long j = 0; j < n; ++j) sq[idx(i, j)] += x * acc[idx(l, j)];
      }
    acc.swap(sq);
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n), 0.0);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) out[static_cast<std::size_t>(i)] += acc[idx(i, j)] * v[static_cast<std::size_t>(j)];
  return out;
}

inline Rational random_rational(std::mt19937_64& g, long num_range = 8,
                                long den_range = 8) {
  std::uniform_int_distribution<long> num(-num_range, num_range);
  std::uniform_int_distribution<long> den(1, den_range);
  Rational r(num(g), den(g));
  r.canonicalize();
  return r;
}

}  // namespace oracles
