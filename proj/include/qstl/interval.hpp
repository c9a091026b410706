#pragma once

#include <optional>
#include <string>

#include "qstl/bigfloat.hpp"
#include "qstl/errors.hpp"
#include "qstl/rational.hpp"

namespace qstl {

// Closed real interval [lo, hi] with dyadic endpoints at a working precision.
// Every operation rounds outward, so the result always contains the exact
// image of the inputs (containment is the only invariant that matters here).
class RInterval {
 public:
  RInterval() : lo_(2), hi_(2), prec_(2) {}
  RInterval(BigFloat lo, BigFloat hi, long prec)
      : lo_(std::move(lo)), hi_(std::move(hi)), prec_(prec) {
    if (!(lo_ <= hi_)) throw Error("RInterval: lo > hi");
  }

  static RInterval point(const BigFloat& x, long prec) {
    return RInterval(x, x, prec);
  }
  static RInterval from_rat(const Rational& q, long prec) {
    return RInterval(BigFloat::from_rat(q, prec, MPFR_RNDD),
                     BigFloat::from_rat(q, prec, MPFR_RNDU), prec);
  }
  static RInterval from_rats(const Rational& lo, const Rational& hi, long prec) {
    return RInterval(BigFloat::from_rat(lo, prec, MPFR_RNDD),
                     BigFloat::from_rat(hi, prec, MPFR_RNDU), prec);
  }
  static RInterval zero(long prec) { return from_rat(Rational(0), prec); }

  const BigFloat& lo() const { return lo_; }
  const BigFloat& hi() const { return hi_; }
  long prec() const { return prec_; }

  Rational lo_q() const { return lo_.to_rat(); }
  Rational hi_q() const { return hi_.to_rat(); }

  bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
  bool is_positive() const { return lo_.sign() > 0; }
  bool is_negative() const { return hi_.sign() < 0; }
  bool contains(const Rational& q) const { return lo_q() <= q && q <= hi_q(); }
  bool contains(const RInterval& o) const {
    return lo_ <= o.lo_ && o.hi_ <= hi_;
  }

  Rational width_q() const { return hi_q() - lo_q(); }
  BigFloat width_up() const { return bf_sub(hi_, lo_, prec_, MPFR_RNDU); }
  Rational mid_q() const { return (lo_q() + hi_q()) / 2; }

  // Upper bound on |x| for x in the interval.
  BigFloat mag() const {
    return bf_max(bf_abs(lo_, prec_, MPFR_RNDU), bf_abs(hi_, prec_, MPFR_RNDU));
  }
  // Lower bound on |x|; zero when the interval straddles 0.
  BigFloat mig() const {
    if (contains_zero()) return BigFloat::from_long(0, prec_);
    return bf_min(bf_abs(lo_, prec_, MPFR_RNDD), bf_abs(hi_, prec_, MPFR_RNDD));
  }

  std::string str() const { return "[" + lo_.str(8) + ", " + hi_.str(8) + "]"; }

 private:
  BigFloat lo_, hi_;
  long prec_;
};

inline RInterval iv_neg(const RInterval& a, long prec) {
  return RInterval(bf_neg(a.hi(), prec, MPFR_RNDD), bf_neg(a.lo(), prec, MPFR_RNDU), prec);
}
inline RInterval iv_add(const RInterval& a, const RInterval& b, long prec) {
  return RInterval(bf_add(a.lo(), b.lo(), prec, MPFR_RNDD),
                   bf_add(a.hi(), b.hi(), prec, MPFR_RNDU), prec);
}
inline RInterval iv_sub(const RInterval& a, const RInterval& b, long prec) {
  return RInterval(bf_sub(a.lo(), b.hi(), prec, MPFR_RNDD),
                   bf_sub(a.hi(), b.lo(), prec, MPFR_RNDU), prec);
}
inline RInterval iv_mul(const RInterval& a, const RInterval& b, long prec) {
  const BigFloat* as[2] = {&a.lo(), &a.hi()};
  const BigFloat* bs[2] = {&b.lo(), &b.hi()};
  BigFloat lo = bf_mul(*as[0], *bs[0], prec, MPFR_RNDD);
  BigFloat hi = bf_mul(*as[0], *bs[0], prec, MPFR_RNDU);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (i == 0 && j == 0) continue;
      lo = bf_min(lo, bf_mul(*as[i], *bs[j], prec, MPFR_RNDD));
      hi = bf_max(hi, bf_mul(*as[i], *bs[j], prec, MPFR_RNDU));
    }
  return RInterval(lo, hi, prec);
}
inline RInterval iv_sqr(const RInterval& a, long prec) {
  BigFloat m = a.mag();
  BigFloat hi = bf_mul(m, m, prec, MPFR_RNDU);
  BigFloat lo(prec);
  if (a.contains_zero()) {
    lo = BigFloat::from_long(0, prec);
  } else {
    BigFloat mi = a.mig();
    lo = bf_mul(mi, mi, prec, MPFR_RNDD);
  }
  return RInterval(lo, hi, prec);
}
inline RInterval iv_div(const RInterval& a, const RInterval& b, long prec) {
  if (b.contains_zero()) throw Error("interval division by interval containing zero");
  const BigFloat* as[2] = {&a.lo(), &a.hi()};
  const BigFloat* bs[2] = {&b.lo(), &b.hi()};
  BigFloat lo = bf_div(*as[0], *bs[0], prec, MPFR_RNDD);
  BigFloat hi = bf_div(*as[0], *bs[0], prec, MPFR_RNDU);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (i == 0 && j == 0) continue;
      lo = bf_min(lo, bf_div(*as[i], *bs[j], prec, MPFR_RNDD));
      hi = bf_max(hi, bf_div(*as[i], *bs[j], prec, MPFR_RNDU));
    }
  return RInterval(lo, hi, prec);
}
inline RInterval iv_abs(const RInterval& a, long prec) {
  return RInterval(a.mig(), a.mag(), prec);
}
inline RInterval iv_hull(const RInterval& a, const RInterval& b, long prec) {
  return RInterval(bf_min(a.lo(), b.lo()), bf_max(a.hi(), b.hi()), prec);
}
inline std::optional<RInterval> iv_intersect(const RInterval& a, const RInterval& b,
                                             long prec) {
  BigFloat lo = bf_max(a.lo(), b.lo());
  BigFloat hi = bf_min(a.hi(), b.hi());
  if (lo > hi) return std::nullopt;
  return RInterval(lo, hi, prec);
}
// Widen by +/- r (r >= 0).
inline RInterval iv_bloat(const RInterval& a, const BigFloat& r, long prec) {
  return RInterval(bf_sub(a.lo(), r, prec, MPFR_RNDD),
                   bf_add(a.hi(), r, prec, MPFR_RNDU), prec);
}

inline RInterval iv_exp(const RInterval& a, long prec) {
  return RInterval(bf_exp(a.lo(), prec, MPFR_RNDD), bf_exp(a.hi(), prec, MPFR_RNDU),
                   prec);
}
inline RInterval iv_sqrt(const RInterval& a, long prec) {
  if (a.hi().sign() < 0) throw Error("interval sqrt of negative interval");
  BigFloat lo = a.lo().sign() <= 0 ? BigFloat::from_long(0, prec)
                                   : bf_sqrt(a.lo(), prec, MPFR_RNDD);
  return RInterval(lo, bf_sqrt(a.hi(), prec, MPFR_RNDU), prec);
}
inline RInterval iv_log(const RInterval& a, long prec) {
  if (a.lo().sign() <= 0) throw Error("interval log needs a positive interval");
  return RInterval(bf_log(a.lo(), prec, MPFR_RNDD), bf_log(a.hi(), prec, MPFR_RNDU),
                   prec);
}

namespace detail {

// Integers k possibly satisfying x ∈ [a.lo, a.hi] for x = (k + phase)·π,
// conservatively over a π enclosure. Returns nullopt when the candidate
// range is too wide to be worth scanning.
inline std::optional<std::pair<long, long>> pi_multiples_in(const RInterval& a,
                                                            const Rational& phase,
                                                            long prec) {
  RInterval pi(bf_pi(prec, MPFR_RNDD), bf_pi(prec, MPFR_RNDU), prec);
  RInterval ratio_lo = iv_div(RInterval::point(a.lo(), prec), pi, prec);
  RInterval ratio_hi = iv_div(RInterval::point(a.hi(), prec), pi, prec);
  Rational k_min = ratio_lo.lo_q() - phase;
  Rational k_max = ratio_hi.hi_q() - phase;
  if (k_max - k_min > 1000) return std::nullopt;
  long lo = static_cast<long>(ceil_int(k_min).get_si());
  long hi = static_cast<long>(floor_int(k_max).get_si());
  return std::make_pair(lo, hi);
}

}  // namespace detail

inline RInterval iv_cos(const RInterval& a, long prec) {
  BigFloat one = BigFloat::from_long(1, prec);
  BigFloat neg_one = BigFloat::from_long(-1, prec);
  auto ks = detail::pi_multiples_in(a, Rational(0), prec);
  if (!ks) return RInterval(neg_one, one, prec);
  BigFloat lo = bf_min(bf_cos(a.lo(), prec, MPFR_RNDD), bf_cos(a.hi(), prec, MPFR_RNDD));
  BigFloat hi = bf_max(bf_cos(a.lo(), prec, MPFR_RNDU), bf_cos(a.hi(), prec, MPFR_RNDU));
  for (long k = ks->first; k <= ks->second; ++k) {
    if (k % 2 == 0)
      hi = bf_max(hi, one);
    else
      lo = bf_min(lo, neg_one);
  }
  lo = bf_max(lo, neg_one);
  hi = bf_min(hi, one);
  return RInterval(lo, hi, prec);
}

inline RInterval iv_sin(const RInterval& a, long prec) {
  BigFloat one = BigFloat::from_long(1, prec);
  BigFloat neg_one = BigFloat::from_long(-1, prec);
  auto ks = detail::pi_multiples_in(a, Rational(1, 2), prec);
  if (!ks) return RInterval(neg_one, one, prec);
  BigFloat lo = bf_min(bf_sin(a.lo(), prec, MPFR_RNDD), bf_sin(a.hi(), prec, MPFR_RNDD));
  BigFloat hi = bf_max(bf_sin(a.lo(), prec, MPFR_RNDU), bf_sin(a.hi(), prec, MPFR_RNDU));
  for (long k = ks->first; k <= ks->second; ++k) {
    // extremum at (k + 1/2)·π where sin = (-1)^k
    if (((k % 2) + 2) % 2 == 0)
      hi = bf_max(hi, one);
    else
      lo = bf_min(lo, neg_one);
  }
  lo = bf_max(lo, neg_one);
  hi = bf_min(hi, one);
  return RInterval(lo, hi, prec);
}

inline RInterval iv_pow_int(const RInterval& a, long n, long prec) {
  if (n < 0) throw Error("iv_pow_int: negative exponent");
  RInterval result = RInterval::from_rat(Rational(1), prec);
  RInterval base = a;
  long e = n;
  while (e > 0) {
    if (e & 1) result = iv_mul(result, base, prec);
    e >>= 1;
    if (e > 0) base = iv_sqr(base, prec);
  }
  return result;
}

// Rectangular complex interval.
struct CInterval {
  RInterval re, im;

  static CInterval point_zero(long prec) {
    return {RInterval::zero(prec), RInterval::zero(prec)};
  }
  static CInterval from_rats(const Rational& re, const Rational& im, long prec) {
    return {RInterval::from_rat(re, prec), RInterval::from_rat(im, prec)};
  }
  long prec() const { return re.prec(); }
  bool contains_zero() const { return re.contains_zero() && im.contains_zero(); }
  bool is_real_point_like() const { return im.contains_zero(); }
  std::string str() const { return re.str() + " + " + im.str() + "i"; }
};

inline CInterval civ_neg(const CInterval& a, long p) {
  return {iv_neg(a.re, p), iv_neg(a.im, p)};
}
inline CInterval civ_conj(const CInterval& a, long p) {
  return {a.re, iv_neg(a.im, p)};
}
inline CInterval civ_add(const CInterval& a, const CInterval& b, long p) {
  return {iv_add(a.re, b.re, p), iv_add(a.im, b.im, p)};
}
inline CInterval civ_sub(const CInterval& a, const CInterval& b, long p) {
  return {iv_sub(a.re, b.re, p), iv_sub(a.im, b.im, p)};
}
inline CInterval civ_mul(const CInterval& a, const CInterval& b, long p) {
  return {iv_sub(iv_mul(a.re, b.re, p), iv_mul(a.im, b.im, p), p),
          iv_add(iv_mul(a.re, b.im, p), iv_mul(a.im, b.re, p), p)};
}
inline CInterval civ_div(const CInterval& a, const CInterval& b, long p) {
  RInterval den = iv_add(iv_sqr(b.re, p), iv_sqr(b.im, p), p);
  CInterval num = civ_mul(a, civ_conj(b, p), p);
  return {iv_div(num.re, den, p), iv_div(num.im, den, p)};
}
inline CInterval civ_hull(const CInterval& a, const CInterval& b, long p) {
  return {iv_hull(a.re, b.re, p), iv_hull(a.im, b.im, p)};
}
inline CInterval civ_bloat(const CInterval& a, const BigFloat& r, long p) {
  return {iv_bloat(a.re, r, p), iv_bloat(a.im, r, p)};
}
// Upper bound on |z|.
inline BigFloat civ_mag(const CInterval& a, long p) {
  BigFloat mr = a.re.mag(), mi = a.im.mag();
  BigFloat s = bf_add(bf_mul(mr, mr, p, MPFR_RNDU), bf_mul(mi, mi, p, MPFR_RNDU), p,
                      MPFR_RNDU);
  return bf_sqrt(s, p, MPFR_RNDU);
}
// e^z = e^re (cos im + i sin im)
inline CInterval civ_exp(const CInterval& a, long p) {
  RInterval mag = iv_exp(a.re, p);
  return {iv_mul(mag, iv_cos(a.im, p), p), iv_mul(mag, iv_sin(a.im, p), p)};
}
inline bool civ_disjoint(const CInterval& a, const CInterval& b, long p) {
  return !iv_intersect(a.re, b.re, p).has_value() ||
         !iv_intersect(a.im, b.im, p).has_value();
}

}  // namespace qstl
