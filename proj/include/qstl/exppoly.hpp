#pragma once

#include <algorithm>
#include <atomic>
#include <memory>
#include <sstream>
#include <vector>

#include "qstl/real.hpp"

namespace qstl {

// Symbolic identity for an irrational exponent (typically one eigenvalue
// cluster of a governing matrix). Exponents are merged only on structural
// identity: exact values by equality, symbols by pointer.
struct ExponentSym {
  Complex value;
  long order_key;  // deterministic registration order, for canonical sorting

  static long next_key() {
    static std::atomic<long> counter{0};
    return counter.fetch_add(1);
  }
};
using SymPtr = std::shared_ptr<const ExponentSym>;

// Exponent of one term: exact rational-complex offset plus a nonnegative
// integer combination of symbols (products of signals sum exponents).
class ExpKey {
 public:
  ExpKey() = default;
  static ExpKey from_exact(ComplexRational c) {
    ExpKey k;
    k.exact_ = std::move(c);
    return k;
  }
  static ExpKey from_sym(SymPtr s) {
    ExpKey k;
    k.syms_.emplace_back(std::move(s), 1);
    return k;
  }

  const ComplexRational& exact_part() const { return exact_; }
  const std::vector<std::pair<SymPtr, long>>& syms() const { return syms_; }
  bool is_exact() const { return syms_.empty(); }
  bool is_exact_zero() const { return syms_.empty() && exact_.is_zero(); }

  Complex value() const {
    Complex v(exact_);
    for (const auto& [s, m] : syms_) {
      Complex sv = s->value;
      if (m != 1) sv = Complex(Rational(m)) * sv;
      v = v + sv;
    }
    return v;
  }
  CInterval enclosure(long prec) const { return value().enclosure(prec); }

  friend ExpKey operator+(const ExpKey& a, const ExpKey& b) {
    ExpKey k;
    k.exact_ = a.exact_ + b.exact_;
    k.syms_ = a.syms_;
    for (const auto& [s, m] : b.syms_) {
      bool found = false;
      for (auto& [t, n] : k.syms_)
        if (t == s) {
          n += m;
          found = true;
          break;
        }
      if (!found) k.syms_.emplace_back(s, m);
    }
    k.sort_syms();
    return k;
  }

  bool same_structure(const ExpKey& o) const {
    if (!(exact_ == o.exact_)) return false;
    if (syms_.size() != o.syms_.size()) return false;
    for (std::size_t i = 0; i < syms_.size(); ++i)
      if (syms_[i].first != o.syms_[i].first || syms_[i].second != o.syms_[i].second)
        return false;
    return true;
  }

  // Total structural order (deterministic within a run).
  bool before(const ExpKey& o) const {
    if (syms_.size() != o.syms_.size()) return syms_.size() < o.syms_.size();
    for (std::size_t i = 0; i < syms_.size(); ++i) {
      long ka = syms_[i].first->order_key, kb = o.syms_[i].first->order_key;
      if (ka != kb) return ka < kb;
      if (syms_[i].second != o.syms_[i].second) return syms_[i].second < o.syms_[i].second;
    }
    if (exact_.re != o.exact_.re) return exact_.re < o.exact_.re;
    return exact_.im < o.exact_.im;
  }

 private:
  void sort_syms() {
    std::sort(syms_.begin(), syms_.end(), [](const auto& a, const auto& b) {
      if (a.first->order_key != b.first->order_key)
        return a.first->order_key < b.first->order_key;
      return a.first < b.first;
    });
  }
  ComplexRational exact_;
  std::vector<std::pair<SymPtr, long>> syms_;
};

inline bool complex_exact_zero(const Complex& c) {
  return c.is_exact() && c.exact_value().is_zero();
}

// One term beta(t) e^{alpha t}: polynomial coefficients in ascending degree.
struct ExpTerm {
  ExpKey key;
  std::vector<Complex> coeffs;
};

// Exponential polynomial: finite sum of terms with structurally distinct
// exponents, kept sorted by the structural key order.
class ExpPoly {
 public:
  ExpPoly() = default;

  static ExpPoly zero() { return ExpPoly(); }
  static ExpPoly constant(Complex c) {
    if (complex_exact_zero(c)) return ExpPoly();
    ExpPoly f;
    f.terms_.push_back({ExpKey::from_exact(ComplexRational()), {std::move(c)}});
    return f;
  }
  static ExpPoly constant(const Rational& q) { return constant(Complex(q)); }
  // beta(t) e^{alpha t} from raw parts
  static ExpPoly term(ExpKey key, std::vector<Complex> coeffs) {
    ExpPoly f;
    f.terms_.push_back({std::move(key), std::move(coeffs)});
    f.normalize();
    return f;
  }
  // the monomial t (degree 1, exponent 0)
  static ExpPoly t_monomial() {
    ExpPoly f;
    f.terms_.push_back({ExpKey::from_exact(ComplexRational()),
                        {Complex(Rational(0)), Complex(Rational(1))}});
    return f;
  }

  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  friend ExpPoly operator+(const ExpPoly& a, const ExpPoly& b) {
    ExpPoly f;
    f.terms_ = a.terms_;
    for (const ExpTerm& t : b.terms_) f.terms_.push_back(t);
    f.normalize();
    return f;
  }
  friend ExpPoly operator-(const ExpPoly& a) {
    ExpPoly f = a;
    for (ExpTerm& t : f.terms_)
      for (Complex& c : t.coeffs) c = -c;
    return f;
  }
  friend ExpPoly operator-(const ExpPoly& a, const ExpPoly& b) { return a + (-b); }
  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
    ExpPoly f;
    for (const ExpTerm& ta : a.terms_)
      for (const ExpTerm& tb : b.terms_) {
        ExpTerm t;
        t.key = ta.key + tb.key;
        t.coeffs.assign(ta.coeffs.size() + tb.coeffs.size() - 1, Complex(Rational(0)));
        for (std::size_t i = 0; i < ta.coeffs.size(); ++i)
          for (std::size_t j = 0; j < tb.coeffs.size(); ++j)
            t.coeffs[i + j] = t.coeffs[i + j] + ta.coeffs[i] * tb.coeffs[j];
        f.terms_.push_back(std::move(t));
      }
    f.normalize();
    return f;
  }
  ExpPoly scaled(const Complex& s) const {
    if (complex_exact_zero(s)) return ExpPoly();
    ExpPoly f = *this;
    for (ExpTerm& t : f.terms_)
      for (Complex& c : t.coeffs) c = c * s;
    return f;
  }

  // termwise (beta' + alpha beta) e^{alpha t}
  ExpPoly derivative() const {
    ExpPoly f;
    for (const ExpTerm& t : terms_) {
      Complex alpha = t.key.value();
      ExpTerm d;
      d.key = t.key;
      std::size_t n = t.coeffs.size();
      d.coeffs.assign(n, Complex(Rational(0)));
      for (std::size_t r = 0; r < n; ++r) {
        Complex v = alpha * t.coeffs[r];
        if (r + 1 < n) v = v + Complex(Rational(static_cast<long>(r + 1))) * t.coeffs[r + 1];
        d.coeffs[r] = v;
      }
      f.terms_.push_back(std::move(d));
    }
    f.normalize();
    return f;
  }

  CInterval eval(const Rational& t, long prec) const {
    CInterval acc = CInterval::point_zero(prec);
    RInterval ti = RInterval::from_rat(t, prec);
    for (const ExpTerm& term : terms_) {
      CInterval alpha = term.key.enclosure(prec);
      CInterval e = civ_exp(CInterval{iv_mul(alpha.re, ti, prec), iv_mul(alpha.im, ti, prec)}, prec);
      CInterval poly = CInterval::point_zero(prec);
      for (std::size_t r = term.coeffs.size(); r-- > 0;) {
        poly = civ_mul(poly, CInterval{ti, RInterval::zero(prec)}, prec);
        poly = civ_add(poly, term.coeffs[r].enclosure(prec), prec);
      }
      acc = civ_add(acc, civ_mul(poly, e, prec), prec);
    }
    return acc;
  }

  // Distinctness guard: structurally different exponents must be numerically
  // separable; raises NormalizationAmbiguity when they stay inseparable.
  void certify_distinct_exponents(long budget_bits = 512) const {
    for (std::size_t i = 0; i < terms_.size(); ++i)
      for (std::size_t j = i + 1; j < terms_.size(); ++j) {
        long p = 96;
        for (;;) {
          CInterval a = terms_[i].key.enclosure(p);
          CInterval b = terms_[j].key.enclosure(p);
          if (civ_disjoint(a, b, p)) break;
          if (p >= budget_bits)
            throw NormalizationAmbiguity(
                "exponents with different structure are numerically inseparable");
          p *= 2;
        }
      }
  }

 private:
  void normalize() {
    std::vector<ExpTerm> merged;
    std::sort(terms_.begin(), terms_.end(),
              [](const ExpTerm& a, const ExpTerm& b) { return a.key.before(b.key); });
    for (ExpTerm& t : terms_) {
      if (!merged.empty() && merged.back().key.same_structure(t.key)) {
        ExpTerm& m = merged.back();
        if (m.coeffs.size() < t.coeffs.size()) m.coeffs.resize(t.coeffs.size(), Complex(Rational(0)));
        for (std::size_t r = 0; r < t.coeffs.size(); ++r) m.coeffs[r] = m.coeffs[r] + t.coeffs[r];
      } else {
        merged.push_back(std::move(t));
      }
    }
    terms_.clear();
    for (ExpTerm& t : merged) {
      while (!t.coeffs.empty() && complex_exact_zero(t.coeffs.back())) t.coeffs.pop_back();
      if (!t.coeffs.empty()) terms_.push_back(std::move(t));
    }
  }

  std::vector<ExpTerm> terms_;
};

// One term of the canonical real form: e^{at} (p(t) cos bt + q(t) sin bt).
// p and q stay complex-valued with imaginary parts enclosing zero, so the
// evaluation below never drops an uncertified residual; the real part of the
// complex evaluation is a sound enclosure of the (certified real) value.
struct RealTerm {
  Real a;
  Real b;
  bool b_zero = false;  // b is exactly zero (pure real exponent)
  std::vector<Complex> p, q;
};

class RealExpPoly {
 public:
  RealExpPoly() = default;
  explicit RealExpPoly(std::vector<RealTerm> terms) : terms_(std::move(terms)) {}

  const std::vector<RealTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  RealExpPoly derivative() const {
    std::vector<RealTerm> out;
    out.reserve(terms_.size());
    for (const RealTerm& t : terms_) {
      RealTerm d;
      d.a = t.a;
      d.b = t.b;
      d.b_zero = t.b_zero;
      std::size_t n = std::max(t.p.size(), t.q.size());
      auto coeff = [](const std::vector<Complex>& v, std::size_t i) {
        return i < v.size() ? v[i] : Complex(Rational(0));
      };
      Complex a_c{t.a, Real(0)};
      Complex b_c{t.b, Real(0)};
      // (e^{at}(p cos + q sin))' = e^{at}((p' + a p + b q)cos + (q' + a q - b p)sin)
      d.p.resize(n, Complex(Rational(0)));
      d.q.resize(n, Complex(Rational(0)));
      for (std::size_t r = 0; r < n; ++r) {
        Complex dp = a_c * coeff(t.p, r);
        Complex dq = a_c * coeff(t.q, r);
        if (!t.b_zero) {
          dp = dp + b_c * coeff(t.q, r);
          dq = dq - b_c * coeff(t.p, r);
        }
        Complex mult(Rational(static_cast<long>(r + 1)));
        dp = dp + mult * coeff(t.p, r + 1);
        dq = dq + mult * coeff(t.q, r + 1);
        d.p[r] = dp;
        d.q[r] = dq;
      }
      out.push_back(std::move(d));
    }
    return RealExpPoly(std::move(out));
  }

  // Enclosure of f over a point or interval argument; the argument is given
  // as a real interval (a point is a degenerate interval).
  RInterval eval_iv(const RInterval& t, long prec) const {
    RInterval acc = RInterval::zero(prec);
    for (const RealTerm& term : terms_) {
      RInterval at = iv_mul(term.a.enclosure(prec), t, prec);
      RInterval e = iv_exp(at, prec);
      RInterval cosb = RInterval::zero(prec), sinb = RInterval::zero(prec);
      if (!term.b_zero) {
        RInterval bt = iv_mul(term.b.enclosure(prec), t, prec);
        cosb = iv_cos(bt, prec);
        sinb = iv_sin(bt, prec);
      }
      CInterval tc{t, RInterval::zero(prec)};
      auto horner = [&](const std::vector<Complex>& cs) {
        CInterval poly = CInterval::point_zero(prec);
        for (std::size_t r = cs.size(); r-- > 0;) {
          poly = civ_mul(poly, tc, prec);
          poly = civ_add(poly, cs[r].enclosure(prec), prec);
        }
        return poly;
      };
      CInterval val = horner(term.p);
      if (!term.b_zero) {
        val = CInterval{iv_mul(val.re, cosb, prec), iv_mul(val.im, cosb, prec)};
        CInterval qs = horner(term.q);
        val = civ_add(val, CInterval{iv_mul(qs.re, sinb, prec), iv_mul(qs.im, sinb, prec)}, prec);
      }
      acc = iv_add(acc, iv_mul(val.re, e, prec), prec);
    }
    return acc;
  }

  RInterval eval_point(const Rational& t, long prec) const {
    return eval_iv(RInterval::from_rat(t, prec), prec);
  }

 private:
  std::vector<RealTerm> terms_;
};

// Range evaluation helpers: naive interval evaluation intersected with a
// first-order Taylor form, with internal bisection. Sound for any depth.
class RangeEvaluator {
 public:
  explicit RangeEvaluator(RealExpPoly f) : f_(std::move(f)), df_(f_.derivative()) {}

  const RealExpPoly& f() const { return f_; }
  const RealExpPoly& df() const { return df_; }

  RInterval range(const Rational& lo, const Rational& hi, long prec, int depth = 4) const {
    return piece(lo, hi, prec, depth);
  }

 private:
  RInterval piece(const Rational& lo, const Rational& hi, long prec, int depth) const {
    RInterval naive = f_.eval_iv(RInterval::from_rats(lo, hi, prec), prec);
    // Taylor form around the midpoint: f(c) + f'([lo,hi]) * ([lo,hi]-c)
    Rational c = (lo + hi) / 2;
    RInterval fc = f_.eval_point(c, prec);
    RInterval slope = df_.eval_iv(RInterval::from_rats(lo, hi, prec), prec);
    RInterval dev = RInterval::from_rats(lo - c, hi - c, prec);
    RInterval taylor = iv_add(fc, iv_mul(slope, dev, prec), prec);
    RInterval best = iv_intersect(naive, taylor, prec).value_or(naive);
    if (depth <= 0 || hi == lo) return best;
    // bisect if the piece is still wide relative to the midpoint value
    RInterval left = piece(lo, c, prec, depth - 1);
    RInterval right = piece(c, hi, prec, depth - 1);
    RInterval split = iv_hull(left, right, prec);
    return iv_intersect(best, split, prec).value_or(best);
  }

  RealExpPoly f_;
  RealExpPoly df_;
};

// Pairs conjugate exponents into cos/sin terms and certifies the realness
// structure. Terms whose imaginary exponent part cannot be signed are kept
// as near-real single terms (their enclosures still carry the residual).
inline RealExpPoly canonical_real_form(const ExpPoly& f, const CertSettings& cs = {}) {
  f.certify_distinct_exponents(std::min<long>(cs.cap_bits, 512));
  struct Entry {
    const ExpTerm* term;
    Sign im_sign;
    bool used = false;
  };
  std::vector<Entry> entries;
  // single-shot probes: a healthy real exponent stays Undetermined forever,
  // so escalating here would only burn refinement work
  long probe = std::max<long>(96, cs.start_bits);
  for (const ExpTerm& t : f.terms()) {
    Complex alpha = t.key.value();
    entries.push_back({&t, sign_at(alpha.im, probe), false});
  }
  std::vector<RealTerm> out;
  auto coeff = [](const std::vector<Complex>& v, std::size_t i) {
    return i < v.size() ? v[i] : Complex(Rational(0));
  };
  const Complex i_unit{Real(0), Real(1)};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].used) continue;
    const ExpTerm& t = *entries[i].term;
    Complex alpha = t.key.value();
    if (entries[i].im_sign == Sign::Undetermined) {
      // treated as a real exponent; coefficients must also be near-real
      for (const Complex& c : t.coeffs) {
        if (sign_at(c.im, probe) != Sign::Undetermined)
          throw RealnessViolation(
              "real-exponent term has a certified nonzero imaginary coefficient");
      }
      RealTerm rt;
      rt.a = alpha.re;
      rt.b = alpha.im;
      rt.b_zero = alpha.im.is_exact() && alpha.im.exact_value() == 0;
      rt.p = t.coeffs;
      if (!rt.b_zero) {
        rt.q.reserve(t.coeffs.size());
        for (const Complex& c : t.coeffs) rt.q.push_back(i_unit * c);
      }
      entries[i].used = true;
      out.push_back(std::move(rt));
      continue;
    }
    // find the conjugate partner numerically
    std::size_t partner = entries.size();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      if (j == i || entries[j].used) continue;
      if (entries[j].im_sign == entries[i].im_sign ||
          entries[j].im_sign == Sign::Undetermined)
        continue;
      long p = 96;
      Complex cand = entries[j].term->key.value();
      CInterval a = alpha.enclosure(p);
      CInterval b = civ_conj(cand.enclosure(p), p);
      if (!civ_disjoint(a, b, p)) {
        partner = j;
        break;
      }
    }
    if (partner == entries.size())
      throw RealnessViolation("unpaired complex exponent in a real-valued signal");
    const ExpTerm& u = *entries[partner].term;
    // conjugacy check on coefficients at enclosure level
    std::size_t n = std::max(t.coeffs.size(), u.coeffs.size());
    long pc = 96;
    for (std::size_t r = 0; r < n; ++r) {
      CInterval a = coeff(t.coeffs, r).enclosure(pc);
      CInterval b = civ_conj(coeff(u.coeffs, r).enclosure(pc), pc);
      if (civ_disjoint(a, b, pc))
        throw RealnessViolation("conjugate terms have non-conjugate coefficients");
    }
    // orient so that b > 0
    const ExpTerm& pos = entries[i].im_sign == Sign::Positive ? t : u;
    const ExpTerm& neg = entries[i].im_sign == Sign::Positive ? u : t;
    Complex ap = pos.key.value();
    RealTerm rt;
    rt.a = ap.re;
    rt.b = ap.im;
    rt.b_zero = false;
    rt.p.resize(n, Complex(Rational(0)));
    rt.q.resize(n, Complex(Rational(0)));
    for (std::size_t r = 0; r < n; ++r) {
      Complex bp = coeff(pos.coeffs, r), bn = coeff(neg.coeffs, r);
      rt.p[r] = bp + bn;
      rt.q[r] = i_unit * (bp - bn);
    }
    entries[i].used = entries[partner].used = true;
    out.push_back(std::move(rt));
  }
  // deterministic order: by enclosure of (a, b) at a fixed precision
  std::sort(out.begin(), out.end(), [](const RealTerm& x, const RealTerm& y) {
    Rational ax = x.a.enclosure(96).lo_q(), ay = y.a.enclosure(96).lo_q();
    if (ax != ay) return ax < ay;
    return x.b.enclosure(96).lo_q() < y.b.enclosure(96).lo_q();
  });
  return RealExpPoly(std::move(out));
}

}  // namespace qstl
