#include <catch2/catch_amalgamated.hpp>

#include "qstl/model.hpp"
#include "support/oqw.hpp"
#include "support/oracles.hpp"

using namespace qstl;

namespace {

Qctmc oqw_model() {
  oqw::Fixture fx = oqw::build();
  Qctmc m;
  m.classical_states = fx.states;
  m.hilbert_dim = 2;
  m.h = fx.h;
  m.ls = {fx.l};
  m.rho0 = fx.rho0;
  return m;
}

// enclosure lies within +-2^-bits of the rational bracket [lo, hi]
bool within_bits(const RInterval& enc, const Rational& lo, const Rational& hi, long bits) {
  Rational slack = pow2(-bits);
  return enc.lo_q() >= lo - slack && enc.hi_q() <= hi + slack;
}
bool within_bits(const RInterval& enc, const Rational& v, long bits) {
  return within_bits(enc, v, v, bits);
}

const RealTerm* find_term(const RealExpPoly& f, const Rational& a_lo, const Rational& a_hi,
                          const Rational& b) {
  for (const RealTerm& t : f.terms()) {
    RInterval ae = t.a.enclosure(96);
    RInterval be = t.b.enclosure(96);
    if (ae.lo_q() <= a_hi && a_lo <= ae.hi_q() && be.contains(b)) return &t;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("validate_model") {
  Qctmc m = oqw_model();
  CHECK(validate_model(m).ok);

  Qctmc bad_h = m;
  bad_h.h.at(0, 1) = CScalar(Rational(1));  // H[0,1]=1, H[1,0]=0: not Hermitian
  auto rep = validate_model(bad_h);
  CHECK(!rep.ok);
  CHECK(rep.violations[0].find("Hermitian") != std::string::npos);

  Qctmc bad_rho = m;
  bad_rho.rho0 = Matrix(8, 8);  // zero trace
  auto rep2 = validate_model(bad_rho);
  CHECK(!rep2.ok);
  bool trace_flagged = false;
  for (const auto& v : rep2.violations)
    if (v.find("trace") != std::string::npos) trace_flagged = true;
  CHECK(trace_flagged);
}

TEST_CASE("from_ctmc: two-state closed form and validation errors") {
  // Q = [[-1,1],[1,-1]], x(0) = (1,0): x0(t) = 1/2 + 1/2 e^{-2t}
  std::vector<std::vector<Rational>> q{{Rational(-1), Rational(1)},
                                       {Rational(1), Rational(-1)}};
  Qctmc m = from_ctmc({"a", "b"}, q, {Rational(1), Rational(0)});
  CHECK(validate_model(m).ok);
  SignalTable table = signal_table(m, 64);
  const Signal& xa = table.at("a");
  for (const Rational& t : {Rational(0), Rational(1, 2), Rational(3), Rational(13, 4)}) {
    auto [lo, hi] = oracles::exp_bounds(Rational(-2) * t);
    Rational want_lo = Rational(1, 2) + lo / 2, want_hi = Rational(1, 2) + hi / 2;
    RInterval got = xa.real.eval_point(t, 96);
    CHECK(got.lo_q() <= want_hi);
    CHECK(got.hi_q() >= want_lo);
    CHECK(got.width_q() < pow2(-50));
  }
  CHECK(xa.exact_initial.has_value());
  CHECK(*xa.exact_initial == Rational(1));

  // single state: constant signal 1
  Qctmc one = from_ctmc({"s"}, {{Rational(0)}}, {Rational(1)});
  SignalTable ot = signal_table(one, 64);
  CHECK(ot.at("s").real.eval_point(Rational(17, 3), 64).contains(Rational(1)));

  CHECK_THROWS_AS(from_ctmc({"a", "b"}, {{Rational(-1), Rational(2)}, {Rational(1), Rational(-1)}},
                            {Rational(1), Rational(0)}),
                  InvalidGenerator);
  CHECK_THROWS_AS(from_ctmc({"a", "b"}, {{Rational(-1), Rational(1)}, {Rational(-1), Rational(1)}},
                            {Rational(1), Rational(0)}),
                  InvalidGenerator);
}

TEST_CASE("from_ctmc matches the transient-distribution oracle on random generators") {
  auto g = oracles::rng(220);
  std::uniform_int_distribution<long> nstates(2, 4);
  std::uniform_int_distribution<long> rate_num(0, 3);
  std::uniform_real_distribution<double> tpick(0.0, 4.0);
  for (int rep = 0; rep < 10; ++rep) {
    long n = nstates(g);
    std::vector<std::vector<Rational>> q(n, std::vector<Rational>(n, Rational(0)));
    for (long i = 0; i < n; ++i) {
      Rational row(0);
      for (long j = 0; j < n; ++j) {
        if (i == j) continue;
        q[i][j] = Rational(rate_num(g), 2);
        row += q[i][j];
      }
      q[i][i] = -row;
    }
    std::vector<Rational> x0(n, Rational(0));
    x0[0] = Rational(1, 2);
    x0[n - 1] += Rational(1, 2);
    std::vector<std::string> names;
    for (long i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
    Qctmc m = from_ctmc(names, q, x0);
    SignalTable table = signal_table(m, 64);
    for (int k = 0; k < 10; ++k) {
      Rational t(tpick(g));
      auto want = oracles::ctmc_occupancies(q, x0, t);
      for (long s = 0; s < n; ++s) {
        RInterval got = table.at(names[s]).real.eval_point(t, 96);
        Rational mid = got.mid_q();
        CAPTURE(rep, k, s);
        REQUIRE(abs_rat(mid - want[s]) <= pow2(-40));
      }
    }
  }
}

TEST_CASE("OQW signal table reproduces the printed closed forms") {
  Qctmc m = oqw_model();
  SignalTable table = signal_table(m, 96);
  auto [s2lo, s2hi] = oracles::sqrt_bounds(Rational(2), 120);
  Rational a_fast_lo = -(Rational(2) + s2hi) / 2, a_fast_hi = -(Rational(2) + s2lo) / 2;
  Rational a_slow_lo = -(Rational(2) - s2lo) / 2, a_slow_hi = -(Rational(2) - s2hi) / 2;

  SECTION("x00 = 1/2 e^{-(2+s2)t/2} + 1/2 e^{-(2-s2)t/2}") {
    const RealExpPoly& f = table.at("s00").real;
    REQUIRE(f.terms().size() == 2);
    const RealTerm* fast = find_term(f, a_fast_lo, a_fast_hi, Rational(0));
    const RealTerm* slow = find_term(f, a_slow_lo, a_slow_hi, Rational(0));
    REQUIRE(fast != nullptr);
    REQUIRE(slow != nullptr);
    REQUIRE(fast->p.size() == 1);
    CHECK(within_bits(fast->p[0].re.enclosure(96), Rational(1, 2), 40));
    CHECK(within_bits(slow->p[0].re.enclosure(96), Rational(1, 2), 40));
    CHECK(fast->p[0].im.enclosure(96).contains(Rational(0)));
    // exponents within 2^-40 of the printed surds
    CHECK(within_bits(fast->a.enclosure(96), a_fast_lo, a_fast_hi, 40));
    CHECK(within_bits(slow->a.enclosure(96), a_slow_lo, a_slow_hi, 40));
  }

  SECTION("x11 = 1 + (-1+s2)/2 e^{fast} - (1+s2)/2 e^{slow}") {
    const RealExpPoly& f = table.at("s11").real;
    REQUIRE(f.terms().size() == 3);
    const RealTerm* cst = find_term(f, Rational(0), Rational(0), Rational(0));
    const RealTerm* fast = find_term(f, a_fast_lo, a_fast_hi, Rational(0));
    const RealTerm* slow = find_term(f, a_slow_lo, a_slow_hi, Rational(0));
    REQUIRE(cst != nullptr);
    REQUIRE(fast != nullptr);
    REQUIRE(slow != nullptr);
    CHECK(within_bits(cst->p[0].re.enclosure(96), Rational(1), 40));
    CHECK(within_bits(fast->p[0].re.enclosure(96), (s2lo - 1) / 2, (s2hi - 1) / 2, 40));
    CHECK(within_bits(slow->p[0].re.enclosure(96), -(Rational(1) + s2hi) / 2,
                      -(Rational(1) + s2lo) / 2, 40));
  }

  SECTION("x01 and x10 carry the oscillating terms with coefficients +-1/4") {
    for (int which = 0; which < 2; ++which) {
      const RealExpPoly& f = table.at(which == 0 ? "s01" : "s10").real;
      Rational sign = which == 0 ? Rational(1) : Rational(-1);
      REQUIRE(f.terms().size() == 4);
      const RealTerm* fast = find_term(f, a_fast_lo, a_fast_hi, Rational(0));
      const RealTerm* slow = find_term(f, a_slow_lo, a_slow_hi, Rational(0));
      const RealTerm* osc32 = find_term(f, Rational(-3, 2), Rational(-3, 2), Rational(1, 2));
      const RealTerm* osc12 = find_term(f, Rational(-1, 2), Rational(-1, 2), Rational(1, 2));
      REQUIRE(fast != nullptr);
      REQUIRE(slow != nullptr);
      REQUIRE(osc32 != nullptr);
      REQUIRE(osc12 != nullptr);
      CHECK(within_bits(fast->p[0].re.enclosure(96), -s2hi / 4, -s2lo / 4, 40));
      CHECK(within_bits(slow->p[0].re.enclosure(96), s2lo / 4, s2hi / 4, 40));
      // paper: +-1/4[e^{-3t/2}-e^{-t/2}]cos(t/2) +- 1/4[e^{-3t/2}+e^{-t/2}]sin(t/2)
      CHECK(within_bits(osc32->p[0].re.enclosure(96), sign * Rational(1, 4), 40));
      CHECK(within_bits(osc32->q[0].re.enclosure(96), sign * Rational(1, 4), 40));
      CHECK(within_bits(osc12->p[0].re.enclosure(96), sign * Rational(-1, 4), 40));
      CHECK(within_bits(osc12->q[0].re.enclosure(96), sign * Rational(1, 4), 40));
      // exponents of the oscillating pair: -3/2 +- i/2 and -1/2 +- i/2
      CHECK(within_bits(osc32->a.enclosure(96), Rational(-3, 2), 40));
      CHECK(within_bits(osc32->b.enclosure(96), Rational(1, 2), 40));
      CHECK(within_bits(osc12->a.enclosure(96), Rational(-1, 2), 40));
    }
  }

  SECTION("probability invariants: sum to one, stay in [0,1]") {
    auto g = oracles::rng(51);
    std::uniform_real_distribution<double> tpick(0.0, 10.0);
    for (int k = 0; k < 20; ++k) {
      Rational t(tpick(g));
      RInterval total = RInterval::zero(96);
      for (const auto& name : table.names) {
        RInterval x = table.at(name).real.eval_point(t, 96);
        total = iv_add(total, x, 96);
        CHECK(x.hi_q() <= Rational(1) + pow2(-40));
        CHECK(x.lo_q() >= -pow2(-40));
      }
      CHECK(total.contains(Rational(1)));
    }
  }
}

TEST_CASE("state_at encloses the initial state at t=0 and keeps trace one") {
  Qctmc m = oqw_model();
  Matrix rho0 = state_at(m, Rational(0), 64);
  for (long i = 0; i < 8; ++i)
    for (long j = 0; j < 8; ++j) {
      CInterval e = rho0.at(i, j).enclosure(80);
      ComplexRational want = m.rho0.at(i, j).exact();
      CHECK(e.re.contains(want.re));
      CHECK(e.im.contains(want.im));
    }

  Matrix rho1 = state_at(m, Rational(1), 64);
  CInterval tr = rho1.trace().enclosure(96);
  CHECK(tr.re.contains(Rational(1)));
  CHECK(tr.im.contains(Rational(0)));
  // positivity: all eigenvalue enclosures above -2^-30
  auto clusters = eigen_enclosures(rho1, 48);
  for (const auto& c : clusters) CHECK(c.encl.re.hi_q() >= -pow2(-30));

  // 2-state CTMC: diagonal of rho(1) encloses (1/2 + 1/2 e^-2, 1/2 - 1/2 e^-2)
  Qctmc ct = from_ctmc({"a", "b"},
                       {{Rational(-1), Rational(1)}, {Rational(1), Rational(-1)}},
                       {Rational(1), Rational(0)});
  Matrix r = state_at(ct, Rational(1), 64);
  auto [lo, hi] = oracles::exp_bounds(Rational(-2));
  CInterval d0 = r.at(0, 0).enclosure(96);
  CHECK(d0.re.lo_q() <= Rational(1, 2) + hi / 2);
  CHECK(d0.re.hi_q() >= Rational(1, 2) + lo / 2);
  CInterval d1 = r.at(1, 1).enclosure(96);
  CHECK(d1.re.lo_q() <= Rational(1, 2) - lo / 2);
  CHECK(d1.re.hi_q() >= Rational(1, 2) - hi / 2);
}
