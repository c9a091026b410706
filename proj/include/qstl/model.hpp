#pragma once

#include <map>
#include <optional>
#include <string>

#include "qstl/closedform.hpp"

namespace qstl {

// Quantum continuous-time Markov chain with classical states as the leading
// tensor factor: dim = |S| * hilbert_dim, P_s = |s><s| (x) I.
struct Qctmc {
  std::vector<std::string> classical_states;
  long hilbert_dim = 1;
  Matrix h;
  std::vector<Matrix> ls;
  Matrix rho0;

  long dim() const {
    return static_cast<long>(classical_states.size()) * hilbert_dim;
  }
};

inline ValidationReport validate_model(const Qctmc& m, const CertSettings& cs = {}) {
  ValidationReport rep;
  long d = m.dim();
  if (m.classical_states.empty()) rep.fail("no classical states");
  if (m.hilbert_dim < 1) rep.fail("hilbert_dim must be >= 1");
  for (std::size_t i = 0; i < m.classical_states.size(); ++i)
    for (std::size_t j = i + 1; j < m.classical_states.size(); ++j)
      if (m.classical_states[i] == m.classical_states[j])
        rep.fail("duplicate classical state name: " + m.classical_states[i]);
  if (m.h.rows() != d || m.h.cols() != d)
    rep.fail("H has wrong shape (expected " + std::to_string(d) + "x" + std::to_string(d) + ")");
  for (std::size_t j = 0; j < m.ls.size(); ++j)
    if (m.ls[j].rows() != d || m.ls[j].cols() != d)
      rep.fail("L[" + std::to_string(j) + "] has wrong shape");
  if (m.rho0.rows() != d || m.rho0.cols() != d) rep.fail("rho0 has wrong shape");
  if (!rep.ok) return rep;

  // H = H† (exact where exact, certified-difference otherwise)
  for (long i = 0; i < d; ++i)
    for (long j = i; j < d; ++j) {
      const CScalar& a = m.h.at(i, j);
      CScalar b = m.h.at(j, i).conj();
      if (a.is_exact() && b.is_exact()) {
        if (!(a.exact() == b.exact()))
          rep.fail("H not Hermitian at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      } else {
        Complex diff = a.value() - b.value();
        if (sign_of(diff.re, cs) != Sign::Undetermined ||
            sign_of(diff.im, cs) != Sign::Undetermined)
          rep.fail("H not Hermitian at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  ValidationReport density = validate_density(m.rho0, pow2(-30), cs);
  if (!density.ok) {
    for (const std::string& v : density.violations) rep.fail("rho0: " + v);
  }
  return rep;
}

// Lemma-8 embedding of a classical CTMC: quantum factor of dimension 1,
// H = 0, jump operators sqrt(Q[s][t]) |t><s| for each positive rate. The
// diagonal of rho(t) then evolves exactly as x(t) = x(0) exp(Q t).
inline Qctmc from_ctmc(const std::vector<std::string>& states,
                       const std::vector<std::vector<Rational>>& q,
                       const std::vector<Rational>& initial) {
  long n = static_cast<long>(states.size());
  if (n == 0) throw InvalidGenerator("empty state set");
  if (static_cast<long>(q.size()) != n)
    throw InvalidGenerator("rate matrix has wrong number of rows");
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(q[static_cast<std::size_t>(i)].size()) != n)
      throw InvalidGenerator("rate matrix has wrong number of columns");
    Rational row_sum(0);
    for (long j = 0; j < n; ++j) {
      const Rational& rate = q[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (i != j && rate < 0) throw InvalidGenerator("negative off-diagonal rate");
      row_sum += rate;
    }
    if (row_sum != 0) throw InvalidGenerator("generator rows must sum to zero");
  }
  if (static_cast<long>(initial.size()) != n)
    throw InvalidGenerator("initial distribution has wrong length");
  Rational total(0);
  for (const Rational& p : initial) {
    if (p < 0) throw InvalidGenerator("negative initial probability");
    total += p;
  }
  if (total != 1) throw InvalidGenerator("initial distribution must sum to one");

  Qctmc m;
  m.classical_states = states;
  m.hilbert_dim = 1;
  m.h = Matrix(n, n);
  m.rho0 = Matrix(n, n);
  for (long i = 0; i < n; ++i)
    m.rho0.at(i, i) = CScalar(ComplexRational(initial[static_cast<std::size_t>(i)], Rational(0)));
  for (long s = 0; s < n; ++s)
    for (long t = 0; t < n; ++t) {
      if (s == t) continue;
      const Rational& rate = q[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
      if (rate == 0) continue;
      Matrix l(n, n);
      Real amp = sqrt_real(Real(rate));
      if (amp.is_exact())
        l.at(t, s) = CScalar(ComplexRational(amp.exact_value(), Rational(0)));
      else
        l.at(t, s) = CScalar(Complex{amp, Real(0)});
      m.ls.push_back(std::move(l));
    }
  return m;
}

// Occupancy signal of one classical state.
struct Signal {
  ExpPoly cplx;              // sum of rho(t) diagonal entries in the block
  RealExpPoly real;          // canonical real form (certified)
  Real initial;              // x_s(0), exact when rho0 is exact
  std::optional<Rational> exact_initial;
};

struct SignalTable {
  std::vector<std::string> names;
  std::map<std::string, Signal> signals;
  std::shared_ptr<ClosedFormContext> closed_form;
  std::vector<std::string> audit;

  const Signal& at(const std::string& name) const {
    auto it = signals.find(name);
    if (it == signals.end()) throw UnknownSignal("unknown signal: " + name);
    return it->second;
  }
  bool has(const std::string& name) const { return signals.count(name) > 0; }
};

inline SignalTable signal_table(const Qctmc& m, long base_bits = 64,
                                const CertSettings& cs = {}) {
  SignalTable table;
  table.names = m.classical_states;
  long d = m.dim(), dq = m.hilbert_dim;
  Matrix gov = governing_matrix(m.h, m.ls);
  auto ctx = ClosedFormContext::create(gov, vectorize(m.rho0), base_bits, cs, &table.audit);
  table.closed_form = ctx;
  const std::vector<ExpPoly>& coords = ctx->coordinates();
  for (std::size_t s = 0; s < m.classical_states.size(); ++s) {
    Signal sig;
    Real init_re(Rational(0));
    bool init_exact = true;
    Rational init_q(0);
    for (long q = 0; q < dq; ++q) {
      long i = static_cast<long>(s) * dq + q;
      sig.cplx = sig.cplx + coords[static_cast<std::size_t>(i * d + i)];
      const CScalar& r0 = m.rho0.at(i, i);
      if (r0.is_exact()) {
        init_q += r0.exact().re;
        init_re = init_re + Real(r0.exact().re);
      } else {
        init_exact = false;
        init_re = init_re + r0.value().re;
      }
    }
    sig.real = canonical_real_form(sig.cplx, cs);
    sig.initial = init_re;
    if (init_exact) sig.exact_initial = init_q;
    table.signals.emplace(m.classical_states[s], std::move(sig));
  }
  return table;
}

// rho(t) as a matrix of certified complex values (recipe-backed, refinable).
inline Matrix state_at(const Qctmc& m, const Rational& t, long base_bits = 64,
                       const CertSettings& cs = {}) {
  if (t < 0) throw Error("state_at: negative time");
  long d = m.dim();
  Matrix gov = governing_matrix(m.h, m.ls);
  auto ctx = ClosedFormContext::create(gov, vectorize(m.rho0), base_bits, cs);
  Matrix rho(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      ExpPoly coord = ctx->coordinates()[static_cast<std::size_t>(i * d + j)];
      auto poly = std::make_shared<ExpPoly>(std::move(coord));
      Real re = Real::from_fn([poly, t](long p) { return poly->eval(t, p).re; });
      Real im = Real::from_fn([poly, t](long p) { return poly->eval(t, p).im; });
      rho.at(i, j) = CScalar(Complex{std::move(re), std::move(im)});
    }
  return rho;
}

}  // namespace qstl
