#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "qstl/interval.hpp"

namespace qstl {

// Exact complex rational, closed under +, -, *, and / by nonzero.
struct ComplexRational {
  Rational re{0}, im{0};

  ComplexRational() = default;
  ComplexRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  explicit ComplexRational(const Rational& r) : re(r) {}

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }
  ComplexRational conj() const { return {re, -im}; }

  friend ComplexRational operator+(const ComplexRational& a, const ComplexRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend ComplexRational operator-(const ComplexRational& a, const ComplexRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend ComplexRational operator-(const ComplexRational& a) { return {-a.re, -a.im}; }
  friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexRational operator/(const ComplexRational& a, const ComplexRational& b) {
    Rational den = b.re * b.re + b.im * b.im;
    if (den == 0) throw Error("ComplexRational division by zero");
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

// A refinement recipe: anything that can produce an enclosure of one fixed
// real number at a requested precision.
struct RealRecipe {
  virtual ~RealRecipe() = default;
  virtual RInterval eval(long prec) const = 0;
};

namespace detail {
struct BestCell {
  std::mutex mu;
  std::optional<RInterval> best;
  long best_prec = 0;
};
}  // namespace detail

// A certified real number: either an exact rational or a recipe plus the
// tightest enclosure seen so far. Values are immutable; the enclosure cache
// only ever shrinks, so enclosures at increasing precision are nested.
class Real {
 public:
  Real() : exact_(Rational(0)) {}
  Real(const Rational& q) : exact_(q) {}            // NOLINT(runtime/explicit)
  Real(long n) : exact_(Rational(n)) {}             // NOLINT(runtime/explicit)

  static Real from_recipe(std::shared_ptr<const RealRecipe> r) {
    Real x;
    x.exact_.reset();
    x.recipe_ = std::move(r);
    x.cell_ = std::make_shared<detail::BestCell>();
    return x;
  }
  static Real from_fn(std::function<RInterval(long)> fn);

  bool is_exact() const { return exact_.has_value(); }
  const Rational& exact_value() const { return *exact_; }

  RInterval enclosure(long prec) const {
    if (exact_) return RInterval::from_rat(*exact_, prec);
    {
      std::lock_guard<std::mutex> g(cell_->mu);
      if (cell_->best && cell_->best_prec >= prec) return *cell_->best;
    }
    RInterval r = recipe_->eval(prec);
    std::lock_guard<std::mutex> g(cell_->mu);
    if (cell_->best) {
      auto meet = iv_intersect(r, *cell_->best, std::max(prec, cell_->best_prec));
      if (!meet)
        throw Error("Real: enclosures at different precisions are disjoint");
      r = *meet;
    }
    cell_->best = r;
    cell_->best_prec = std::max(prec, cell_->best_prec);
    return r;
  }

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  friend Real operator/(const Real& a, const Real& b);
  friend Real operator-(const Real& a);

 private:
  std::optional<Rational> exact_;
  std::shared_ptr<const RealRecipe> recipe_;
  std::shared_ptr<detail::BestCell> cell_;
};

namespace detail {

struct FnRecipe final : RealRecipe {
  explicit FnRecipe(std::function<RInterval(long)> f) : fn(std::move(f)) {}
  RInterval eval(long prec) const override { return fn(prec); }
  std::function<RInterval(long)> fn;
};

enum class BinOp { Add, Sub, Mul, Div };

struct BinRecipe final : RealRecipe {
  BinRecipe(BinOp o, Real x, Real y) : op(o), a(std::move(x)), b(std::move(y)) {}
  RInterval eval(long prec) const override {
    RInterval ia = a.enclosure(prec);
    switch (op) {
      case BinOp::Add:
        return iv_add(ia, b.enclosure(prec), prec);
      case BinOp::Sub:
        return iv_sub(ia, b.enclosure(prec), prec);
      case BinOp::Mul:
        return iv_mul(ia, b.enclosure(prec), prec);
      case BinOp::Div: {
        // The quotient precondition is a nonzero divisor; escalate locally
        // until its sign certifies, then divide.
        long p = prec;
        RInterval ib = b.enclosure(p);
        long cap = std::max<long>(4 * prec, 512);
        while (ib.contains_zero()) {
          if (p >= cap)
            throw PrecisionExhausted(
                "division: divisor indistinguishable from zero");
          p = std::min(cap, 2 * p);
          ib = b.enclosure(p);
        }
        return iv_div(ia, ib, prec);
      }
    }
    throw Error("unreachable");
  }
  BinOp op;
  Real a, b;
};

enum class UnOp { Neg, Sqrt, Exp, Cos, Sin };

struct UnRecipe final : RealRecipe {
  UnRecipe(UnOp o, Real x) : op(o), a(std::move(x)) {}
  RInterval eval(long prec) const override {
    RInterval ia = a.enclosure(prec);
    switch (op) {
      case UnOp::Neg:
        return iv_neg(ia, prec);
      case UnOp::Sqrt: {
        if (ia.hi().sign() < 0) throw Error("sqrt of a certified-negative value");
        // The represented value is nonnegative; clip rounding spill below 0.
        if (ia.lo().sign() < 0)
          ia = RInterval(BigFloat::from_long(0, prec), ia.hi(), prec);
        return iv_sqrt(ia, prec);
      }
      case UnOp::Exp:
        return iv_exp(ia, prec);
      case UnOp::Cos:
        return iv_cos(ia, prec);
      case UnOp::Sin:
        return iv_sin(ia, prec);
    }
    throw Error("unreachable");
  }
  UnOp op;
  Real a;
};

}  // namespace detail

inline Real Real::from_fn(std::function<RInterval(long)> fn) {
  return from_recipe(std::make_shared<detail::FnRecipe>(std::move(fn)));
}

inline Real operator+(const Real& a, const Real& b) {
  if (a.is_exact() && b.is_exact()) return Real(a.exact_value() + b.exact_value());
  return Real::from_recipe(std::make_shared<detail::BinRecipe>(detail::BinOp::Add, a, b));
}
inline Real operator-(const Real& a, const Real& b) {
  if (a.is_exact() && b.is_exact()) return Real(a.exact_value() - b.exact_value());
  return Real::from_recipe(std::make_shared<detail::BinRecipe>(detail::BinOp::Sub, a, b));
}
inline Real operator*(const Real& a, const Real& b) {
  if (a.is_exact() && b.is_exact()) return Real(a.exact_value() * b.exact_value());
  if (a.is_exact() && a.exact_value() == 0) return Real(0);
  if (b.is_exact() && b.exact_value() == 0) return Real(0);
  return Real::from_recipe(std::make_shared<detail::BinRecipe>(detail::BinOp::Mul, a, b));
}
inline Real operator/(const Real& a, const Real& b) {
  if (b.is_exact()) {
    if (b.exact_value() == 0) throw Error("division by exact zero");
    if (a.is_exact()) return Real(a.exact_value() / b.exact_value());
  }
  return Real::from_recipe(std::make_shared<detail::BinRecipe>(detail::BinOp::Div, a, b));
}
inline Real operator-(const Real& a) {
  if (a.is_exact()) return Real(-a.exact_value());
  return Real::from_recipe(std::make_shared<detail::UnRecipe>(detail::UnOp::Neg, a));
}

inline Real sqrt_real(const Real& a) {
  if (a.is_exact()) {
    const Rational& q = a.exact_value();
    if (q < 0) throw Error("sqrt of negative rational");
    // Exact when numerator and denominator are both perfect squares.
    Int n = q.get_num(), d = q.get_den();
    if (mpz_perfect_square_p(n.get_mpz_t()) && mpz_perfect_square_p(d.get_mpz_t())) {
      Int rn, rd;
      mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
      mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
      return Real(Rational(rn) / Rational(rd));
    }
  }
  return Real::from_recipe(std::make_shared<detail::UnRecipe>(detail::UnOp::Sqrt, a));
}
inline Real exp_real(const Real& a) {
  if (a.is_exact() && a.exact_value() == 0) return Real(1);
  return Real::from_recipe(std::make_shared<detail::UnRecipe>(detail::UnOp::Exp, a));
}
inline Real cos_real(const Real& a) {
  if (a.is_exact() && a.exact_value() == 0) return Real(1);
  return Real::from_recipe(std::make_shared<detail::UnRecipe>(detail::UnOp::Cos, a));
}
inline Real sin_real(const Real& a) {
  if (a.is_exact() && a.exact_value() == 0) return Real(0);
  return Real::from_recipe(std::make_shared<detail::UnRecipe>(detail::UnOp::Sin, a));
}

enum class Sign { Negative, Positive, Undetermined };

// Single-evaluation sign probe at one precision (no escalation); used for
// structural checks where Undetermined is the expected healthy outcome.
inline Sign sign_at(const Real& x, long prec) {
  if (x.is_exact()) {
    int s = sgn(x.exact_value());
    return s > 0 ? Sign::Positive : s < 0 ? Sign::Negative : Sign::Undetermined;
  }
  RInterval e = x.enclosure(prec);
  if (e.is_positive()) return Sign::Positive;
  if (e.is_negative()) return Sign::Negative;
  return Sign::Undetermined;
}

// Certified sign. Positive/Negative are proven; Undetermined means the value
// could not be separated from zero below the cap (it may be exactly zero).
inline Sign sign_of(const Real& x, const CertSettings& cs = {}) {
  if (x.is_exact()) {
    int s = sgn(x.exact_value());
    if (s > 0) return Sign::Positive;
    if (s < 0) return Sign::Negative;
    return Sign::Undetermined;  // exact zero: neither strict sign holds
  }
  long p = cs.start_bits;
  for (;;) {
    RInterval e = x.enclosure(p);
    if (e.is_positive()) return Sign::Positive;
    if (e.is_negative()) return Sign::Negative;
    if (p >= cs.cap_bits) return Sign::Undetermined;
    p = cs.next(p);
  }
}

// Enclosure of x with width <= 2^-bits.
inline RInterval refine(const Real& x, long bits, const CertSettings& cs = {}) {
  Rational target = pow2(-bits);
  long p = std::max(bits + 8, cs.start_bits);
  for (;;) {
    RInterval e = x.enclosure(p);
    if (e.width_q() <= target) return e;
    if (p >= cs.cap_bits)
      throw PrecisionExhausted("refine: cannot reach width 2^-" +
                               std::to_string(bits) + " below the precision cap");
    p = cs.next(p);
  }
}

// Certified complex number as a pair of certified reals.
struct Complex {
  Real re, im;

  Complex() = default;
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(const ComplexRational& c) : re(c.re), im(c.im) {}
  explicit Complex(const Rational& r) : re(r), im(Rational(0)) {}

  bool is_exact() const { return re.is_exact() && im.is_exact(); }
  ComplexRational exact_value() const {
    return {re.exact_value(), im.exact_value()};
  }
  CInterval enclosure(long prec) const {
    return {re.enclosure(prec), im.enclosure(prec)};
  }
  Complex conj() const { return {re, -im}; }
};

inline Complex operator+(const Complex& a, const Complex& b) {
  return {a.re + b.re, a.im + b.im};
}
inline Complex operator-(const Complex& a, const Complex& b) {
  return {a.re - b.re, a.im - b.im};
}
inline Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
inline Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex operator/(const Complex& a, const Complex& b) {
  Real den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
// e^z as a certified complex value.
inline Complex exp_complex(const Complex& z) {
  Real mag = exp_real(z.re);
  return {mag * cos_real(z.im), mag * sin_real(z.im)};
}

// Enclosure-level e^z (the spec's enclose_exp_trig).
inline CInterval enclose_exp_trig(const CInterval& z, long prec) {
  if (!z.re.lo().is_finite() || !z.re.hi().is_finite() || !z.im.lo().is_finite() ||
      !z.im.hi().is_finite())
    throw PrecisionExhausted("enclose_exp_trig: non-finite input box");
  return civ_exp(z, prec);
}

}  // namespace qstl
