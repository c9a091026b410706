#pragma once

// The bundled open-quantum-walk fixture, built directly from its definition:
// positions {s00, s01, s10, s11} (classical factor), coin directions {F, S}
// (quantum factor), H = 0, a single jump operator routing the walk through
// the Hadamard coin, rho0 = |s00><s00| (x) |F><F|.

#include <vector>

#include "qstl/matrix.hpp"

namespace oqw {

using namespace qstl;

inline Matrix ket_bra(long i, long j, long n) {
  Matrix m(n, n);
  m.at(i, j) = CScalar::one();
  return m;
}

struct Fixture {
  std::vector<std::string> states{"s00", "s01", "s10", "s11"};
  Matrix h;     // 8x8 zero
  Matrix l;     // 8x8 jump operator
  Matrix rho0;  // 8x8 initial state
};

inline Fixture build() {
  const long ns = 4, nh = 2, d = ns * nh;
  const long s00 = 0, s01 = 1, s10 = 2, s11 = 3;
  const long F = 0, S = 1;

  // |F><+| and |S><-| with |+-> = (|F> +- |S>)/sqrt(2)
  Real inv_sqrt2 = Real(1) / sqrt_real(Real(2));
  CScalar c(Complex{inv_sqrt2, Real(0)});
  Matrix f_plus(nh, nh), s_minus(nh, nh);
  f_plus.at(F, F) = c;
  f_plus.at(F, S) = c;
  s_minus.at(S, F) = c;
  s_minus.at(S, S) = -c;

  auto hop = [&](long to, long from, const Matrix& coin) {
    return tensor(ket_bra(to, from, ns), coin);
  };

  Fixture fx;
  fx.h = Matrix(d, d);
  fx.l = hop(s01, s00, s_minus) + hop(s10, s00, f_plus) + hop(s00, s01, s_minus) +
         hop(s11, s01, f_plus) + hop(s00, s10, f_plus) + hop(s11, s10, s_minus);
  fx.rho0 = tensor(ket_bra(s00, s00, ns), ket_bra(F, F, nh));
  return fx;
}

inline Matrix governing() {
  Fixture fx = build();
  return governing_matrix(fx.h, {fx.l});
}

}  // namespace oqw
