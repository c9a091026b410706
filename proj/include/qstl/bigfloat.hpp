#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

#include "qstl/rational.hpp"

namespace qstl {

// Thin RAII wrapper over mpfr_t. A BigFloat is always an exact dyadic
// rational; rounding direction is chosen per operation by the caller.
class BigFloat {
 public:
  explicit BigFloat(long prec = 64) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, 2);
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  static BigFloat from_long(long x, long prec) {
    BigFloat r(prec);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    return r;
  }
  static BigFloat from_rat(const Rational& q, long prec, mpfr_rnd_t rnd) {
    BigFloat r(prec);
    mpfr_set_q(r.v_, q.get_mpq_t(), rnd);
    return r;
  }
  static BigFloat from_double(double x, long prec) {
    BigFloat r(prec);
    mpfr_set_d(r.v_, x, MPFR_RNDN);
    return r;
  }

  // Exact conversion; every finite BigFloat is a rational.
  Rational to_rat() const {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), v_);
    return q;
  }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  long prec() const { return mpfr_get_prec(v_); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  int cmp(const BigFloat& o) const { return mpfr_cmp(v_, o.v_); }
  bool operator<(const BigFloat& o) const { return cmp(o) < 0; }
  bool operator<=(const BigFloat& o) const { return cmp(o) <= 0; }
  bool operator>(const BigFloat& o) const { return cmp(o) > 0; }
  bool operator>=(const BigFloat& o) const { return cmp(o) >= 0; }
  bool operator==(const BigFloat& o) const { return cmp(o) == 0; }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  std::string str(int digits = 20) const {
    char* s = nullptr;
    if (mpfr_asprintf(&s, "%.*Rg", digits, v_) < 0) return "?";
    std::string out(s);
    mpfr_free_str(s);
    return out;
  }

 private:
  mpfr_t v_;
};

// Functional directed-rounding arithmetic. Result carries precision `prec`.
inline BigFloat bf_add(const BigFloat& a, const BigFloat& b, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_add(out.raw(), a.raw(), b.raw(), r);
  return out;
}
inline BigFloat bf_sub(const BigFloat& a, const BigFloat& b, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_sub(out.raw(), a.raw(), b.raw(), r);
  return out;
}
inline BigFloat bf_mul(const BigFloat& a, const BigFloat& b, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_mul(out.raw(), a.raw(), b.raw(), r);
  return out;
}
inline BigFloat bf_div(const BigFloat& a, const BigFloat& b, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_div(out.raw(), a.raw(), b.raw(), r);
  return out;
}
inline BigFloat bf_neg(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_neg(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_abs(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_abs(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_sqrt(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_sqrt(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_exp(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_exp(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_log(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_log(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_cos(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_cos(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_sin(const BigFloat& a, long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_sin(out.raw(), a.raw(), r);
  return out;
}
inline BigFloat bf_pi(long prec, mpfr_rnd_t r) {
  BigFloat out(prec);
  mpfr_const_pi(out.raw(), r);
  return out;
}
// Multiplication by 2^e is exact (no rounding).
inline BigFloat bf_mul_2e(const BigFloat& a, long e, long prec) {
  BigFloat out(prec);
  mpfr_mul_2si(out.raw(), a.raw(), e, MPFR_RNDN);
  return out;
}
inline BigFloat bf_min(const BigFloat& a, const BigFloat& b) { return a <= b ? a : b; }
inline BigFloat bf_max(const BigFloat& a, const BigFloat& b) { return a >= b ? a : b; }

}  // namespace qstl
