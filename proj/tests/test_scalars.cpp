#include <catch2/catch_amalgamated.hpp>

#include "qstl/real.hpp"
#include "support/oracles.hpp"

using namespace qstl;

namespace {

bool contains_bracket(const RInterval& box, const Rational& lo, const Rational& hi) {
  return box.lo_q() <= lo && hi <= box.hi_q();
}

bool intersects_bracket(const RInterval& box, const Rational& lo, const Rational& hi) {
  return box.lo_q() <= hi && lo <= box.hi_q();
}

}  // namespace

TEST_CASE("rational parsing and dyadics") {
  CHECK(*parse_rational("3/4") == Rational(3, 4));
  CHECK(*parse_rational("-7") == Rational(-7));
  CHECK(*parse_rational("-0.25") == Rational(-1, 4));
  CHECK(!parse_rational("a/b").has_value());
  CHECK(!parse_rational("").has_value());
  CHECK(pow2(-3) == Rational(1, 8));
  CHECK(pow2(4) == Rational(16));
  CHECK(floor_int(Rational(-7, 2)) == -4);
  CHECK(ceil_int(Rational(-7, 2)) == -3);
}

TEST_CASE("complex rational field ops") {
  ComplexRational a(Rational(1, 2), Rational(-1, 3));
  ComplexRational b(Rational(2), Rational(1));
  CHECK((a * b) / b == a);
  CHECK(a + b - b == a);
  CHECK((a * a.conj()).im == 0);
  CHECK_THROWS_AS(a / ComplexRational(), Error);
}

TEST_CASE("interval arithmetic basics") {
  long p = 64;
  RInterval a = RInterval::from_rats(Rational(1, 4), Rational(1, 2), p);
  RInterval b = RInterval::from_rats(Rational(-1), Rational(2), p);
  RInterval s = iv_mul(a, b, p);
  CHECK(s.lo_q() <= Rational(-1, 2));
  CHECK(s.hi_q() >= Rational(1));
  CHECK(iv_sqr(b, p).lo_q() == 0);
  CHECK(iv_sqr(b, p).hi_q() >= 4);
  CHECK_THROWS_AS(iv_div(a, b, p), Error);
  RInterval e = iv_exp(RInterval::from_rat(Rational(0), p), p);
  CHECK(e.contains(Rational(1)));
  CHECK(e.width_q() <= pow2(-60));
}

TEST_CASE("interval cos/sin ranges cover critical points") {
  long p = 96;
  // [3, 3.2] contains pi: cos range must reach -1 exactly.
  RInterval x = RInterval::from_rats(Rational(3), Rational(16, 5), p);
  RInterval c = iv_cos(x, p);
  CHECK(c.lo_q() == Rational(-1));
  CHECK(c.hi_q() < Rational(-9, 10));
  // [1.5, 1.6] contains pi/2: sin range must reach +1.
  RInterval y = RInterval::from_rats(Rational(3, 2), Rational(8, 5), p);
  RInterval s = iv_sin(y, p);
  CHECK(s.hi_q() == Rational(1));
  // Wide interval collapses to [-1, 1].
  RInterval w = RInterval::from_rats(Rational(-100), Rational(100), p);
  CHECK(iv_cos(w, p).lo_q() == Rational(-1));
  CHECK(iv_cos(w, p).hi_q() == Rational(1));
}

TEST_CASE("refine: exact rational recipe") {
  // Enclosure of 1/3 with initial width 1/4 refines to width <= 2^-10.
  Real third(Rational(1, 3));
  RInterval r = refine(third, 10);
  CHECK(r.width_q() <= pow2(-10));
  CHECK(r.contains(Rational(1, 3)));
  RInterval r30 = refine(third, 30);
  CHECK(r30.width_q() <= pow2(-30));
  CHECK(r.contains(r30));  // nested refinement
}

TEST_CASE("refine: sqrt(2) against long-division oracle") {
  Real s2 = sqrt_real(Real(2));
  RInterval enc = refine(s2, 30);
  CHECK(enc.width_q() <= pow2(-30));
  auto [lo, hi] = oracles::sqrt_bounds(Rational(2), 80);
  CHECK(intersects_bracket(enc, lo, hi));
  // the oracle bracket is far tighter, so the box must straddle it
  CHECK(enc.lo_q() <= hi);
  CHECK(enc.hi_q() >= lo);
  // perfect squares collapse to exact rationals
  CHECK(sqrt_real(Real(Rational(9, 4))).is_exact());
  CHECK(sqrt_real(Real(Rational(9, 4))).exact_value() == Rational(3, 2));
}

TEST_CASE("sign_of basics") {
  Real pos = Real::from_fn([](long p) {
    return RInterval::from_rats(Rational(1, 4), Rational(1, 2), p);
  });
  CHECK(sign_of(pos) == Sign::Positive);

  // -1/5 - sqrt(2)/2 + sqrt(2)/2 cancels to -1/5.
  Real h = sqrt_real(Real(2)) / Real(2);
  Real x = Real(Rational(-1, 5)) - h + h;
  CHECK(sign_of(x) == Sign::Negative);

  // e - e is exactly zero but never certifies: Undetermined at the cap.
  Real e = exp_real(Real(1));
  CertSettings small;
  small.cap_bits = 64;
  CHECK(sign_of(e - e, small) == Sign::Undetermined);
}

TEST_CASE("enclose_exp_trig examples") {
  long p = 64;
  // exact 0 -> contains exactly 1
  CInterval z0 = CInterval::from_rats(Rational(0), Rational(0), p);
  CInterval e0 = enclose_exp_trig(z0, p);
  CHECK(e0.re.contains(Rational(1)));
  CHECK(e0.im.contains(Rational(0)));
  CHECK(e0.re.width_q() <= pow2(-50));

  // i*pi at 40 bits -> contains -1, tiny width
  long p40 = 40;
  CInterval ipi{RInterval::from_rat(Rational(0), p40),
                RInterval(bf_pi(p40, MPFR_RNDD), bf_pi(p40, MPFR_RNDU), p40)};
  CInterval em1 = enclose_exp_trig(ipi, p40);
  CHECK(em1.re.contains(Rational(-1)));
  CHECK(em1.im.contains(Rational(0)));
  CHECK(em1.re.width_q() <= pow2(-35));
  CHECK(em1.im.width_q() <= pow2(-35));

  // point -1 -> contains e^-1 = 0.36787944..., checked via Taylor oracle
  CInterval m1 = CInterval::from_rats(Rational(-1), Rational(0), p);
  CInterval r = enclose_exp_trig(m1, p);
  auto [lo, hi] = oracles::exp_bounds(Rational(-1));
  CHECK(contains_bracket(r.re, lo, hi));
}

TEST_CASE("containment and precision monotonicity on random expression trees") {
  auto g = oracles::rng(7001);
  std::uniform_int_distribution<int> op_pick(0, 6);
  int trees = 400;
  int checked = 0;
  for (int t = 0; t < trees; ++t) {
    // build a random tree of depth <= 4 over {+,-,*,/,exp,cos,sin}; track an
    // independent high-precision point evaluation alongside
    struct Node {
      Real val;
      BigFloat pt;
    };
    long op = 1024;  // oracle precision
    std::vector<Node> stack;
    auto push_leaf = [&] {
      Rational q = oracles::random_rational(g, 4, 4);
      stack.push_back({Real::from_fn([q](long p) {
                         return RInterval::from_rat(q, p);
                       }),
                       BigFloat::from_rat(q, op, MPFR_RNDN)});
    };
    push_leaf();
    int steps = 10;
    for (int i = 0; i < steps; ++i) {
      int o = op_pick(g);
      if (o <= 3 && stack.size() < 2) push_leaf();
      Node a = stack.back();
      stack.pop_back();
      switch (o) {
        case 0: {
          Node b = stack.back();
          stack.pop_back();
          stack.push_back({a.val + b.val, bf_add(a.pt, b.pt, op, MPFR_RNDN)});
          break;
        }
        case 1: {
          Node b = stack.back();
          stack.pop_back();
          stack.push_back({a.val - b.val, bf_sub(a.pt, b.pt, op, MPFR_RNDN)});
          break;
        }
        case 2: {
          Node b = stack.back();
          stack.pop_back();
          stack.push_back({a.val * b.val, bf_mul(a.pt, b.pt, op, MPFR_RNDN)});
          break;
        }
        case 3: {
          Node b = stack.back();
          stack.pop_back();
          // avoid division by values near zero
          if (bf_abs(b.pt, op, MPFR_RNDN) < BigFloat::from_rat(Rational(1, 100), op, MPFR_RNDN)) {
            stack.push_back(a);
            break;
          }
          stack.push_back({a.val / b.val, bf_div(a.pt, b.pt, op, MPFR_RNDN)});
          break;
        }
        case 4: {
          // clamp exponent inputs to keep magnitudes sane
          if (bf_abs(a.pt, op, MPFR_RNDN) > BigFloat::from_long(6, op)) {
            stack.push_back(a);
            break;
          }
          stack.push_back({exp_real(a.val), bf_exp(a.pt, op, MPFR_RNDN)});
          break;
        }
        case 5:
          stack.push_back({cos_real(a.val), bf_cos(a.pt, op, MPFR_RNDN)});
          break;
        default:
          stack.push_back({sin_real(a.val), bf_sin(a.pt, op, MPFR_RNDN)});
          break;
      }
    }
    const Node& root = stack.back();
    try {
      RInterval e64 = root.val.enclosure(64);
      RInterval e160 = root.val.enclosure(160);
      CAPTURE(t);
      REQUIRE(e64.contains(e160));  // nesting
      // high-precision pointwise oracle stays in both boxes
      Rational ptq = root.pt.to_rat();
      Rational slack = pow2(-900);  // oracle's own rounding allowance
      REQUIRE(e160.lo_q() <= ptq + slack);
      REQUIRE(e160.hi_q() >= ptq - slack);
      ++checked;
    } catch (const PrecisionExhausted&) {
      // divisions that straddle zero may legitimately refuse; skip
    }
  }
  CHECK(checked > trees / 2);
}

TEST_CASE("monotone refinement width bound") {
  Real s2 = sqrt_real(Real(2));
  Real e = exp_real(Real(Rational(1, 3)));
  for (long bits : {16L, 48L, 96L, 200L}) {
    CHECK(refine(s2, bits).width_q() <= pow2(-bits));
    CHECK(refine(e, bits).width_q() <= pow2(-bits));
    CHECK(refine(Real(Rational(22, 7)), bits).width_q() <= pow2(-bits));
  }
}

TEST_CASE("sign_of is never wrong on rational-only recipe trees") {
  auto g = oracles::rng(9102);
  std::uniform_int_distribution<int> op_pick(0, 3);
  for (int t = 0; t < 500; ++t) {
    Rational exact = oracles::random_rational(g, 6, 6);
    Real val = Real::from_fn([exact](long p) { return RInterval::from_rat(exact, p); });
    for (int i = 0; i < 6; ++i) {
      Rational q = oracles::random_rational(g, 6, 6);
      Real leaf = Real::from_fn([q](long p) { return RInterval::from_rat(q, p); });
      switch (op_pick(g)) {
        case 0:
          exact += q;
          val = val + leaf;
          break;
        case 1:
          exact -= q;
          val = val - leaf;
          break;
        case 2:
          exact *= q;
          val = val * leaf;
          break;
        default:
          if (q == 0) break;
          exact /= q;
          val = val / leaf;
          break;
      }
    }
    Sign s = sign_of(val);
    if (s == Sign::Positive) REQUIRE(exact > 0);
    if (s == Sign::Negative) REQUIRE(exact < 0);
    if (exact == 0) REQUIRE(s == Sign::Undetermined);
  }
}
