#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "qstl/matrix.hpp"

namespace qstl {

// A certified eigenvalue cluster: the box contains exactly `multiplicity`
// eigenvalues of the input (counting algebraic multiplicity), and boxes of
// distinct clusters are disjoint.
struct EigenCluster {
  CInterval encl;
  long multiplicity = 1;
};

namespace eig_detail {

// Point complex arithmetic on BigFloat (round-to-nearest); used only to build
// the approximate Schur decomposition. All certification happens in interval
// arithmetic afterwards.
struct CF {
  BigFloat re, im;
  CF() : re(2), im(2) {}
  CF(BigFloat r, BigFloat i) : re(std::move(r)), im(std::move(i)) {}
};

inline CF cf_zero(long w) { return {BigFloat::from_long(0, w), BigFloat::from_long(0, w)}; }
inline CF cf_one(long w) { return {BigFloat::from_long(1, w), BigFloat::from_long(0, w)}; }
inline CF cf_add(const CF& a, const CF& b, long w) {
  return {bf_add(a.re, b.re, w, MPFR_RNDN), bf_add(a.im, b.im, w, MPFR_RNDN)};
}
inline CF cf_sub(const CF& a, const CF& b, long w) {
  return {bf_sub(a.re, b.re, w, MPFR_RNDN), bf_sub(a.im, b.im, w, MPFR_RNDN)};
}
inline CF cf_mul(const CF& a, const CF& b, long w) {
  BigFloat re = bf_sub(bf_mul(a.re, b.re, w, MPFR_RNDN), bf_mul(a.im, b.im, w, MPFR_RNDN), w, MPFR_RNDN);
  BigFloat im = bf_add(bf_mul(a.re, b.im, w, MPFR_RNDN), bf_mul(a.im, b.re, w, MPFR_RNDN), w, MPFR_RNDN);
  return {re, im};
}
inline CF cf_conj(const CF& a, long w) { return {a.re, bf_neg(a.im, w, MPFR_RNDN)}; }
inline CF cf_neg(const CF& a, long w) {
  return {bf_neg(a.re, w, MPFR_RNDN), bf_neg(a.im, w, MPFR_RNDN)};
}
inline BigFloat cf_abs2(const CF& a, long w) {
  return bf_add(bf_mul(a.re, a.re, w, MPFR_RNDN), bf_mul(a.im, a.im, w, MPFR_RNDN), w, MPFR_RNDN);
}
inline BigFloat cf_abs(const CF& a, long w) { return bf_sqrt(cf_abs2(a, w), w, MPFR_RNDN); }
inline CF cf_div(const CF& a, const CF& b, long w) {
  BigFloat d = cf_abs2(b, w);
  CF num = cf_mul(a, cf_conj(b, w), w);
  return {bf_div(num.re, d, w, MPFR_RNDN), bf_div(num.im, d, w, MPFR_RNDN)};
}
inline CF cf_scale(const CF& a, const BigFloat& s, long w) {
  return {bf_mul(a.re, s, w, MPFR_RNDN), bf_mul(a.im, s, w, MPFR_RNDN)};
}
inline bool cf_is_zero(const CF& a) { return a.re.is_zero() && a.im.is_zero(); }

// principal complex square root
inline CF cf_sqrt(const CF& z, long w) {
  BigFloat zero = BigFloat::from_long(0, w);
  BigFloat m = cf_abs(z, w);
  if (m.is_zero()) return cf_zero(w);
  BigFloat two = BigFloat::from_long(2, w);
  BigFloat u = bf_sqrt(bf_div(bf_add(m, bf_abs(z.re, w, MPFR_RNDN), w, MPFR_RNDN), two, w, MPFR_RNDN), w, MPFR_RNDN);
  if (z.re.sign() >= 0) {
    BigFloat im = bf_div(z.im, bf_mul(two, u, w, MPFR_RNDN), w, MPFR_RNDN);
    return {u, im};
  }
  BigFloat re = bf_div(bf_abs(z.im, w, MPFR_RNDN), bf_mul(two, u, w, MPFR_RNDN), w, MPFR_RNDN);
  BigFloat im = z.im.sign() >= 0 ? u : bf_neg(u, w, MPFR_RNDN);
  if (z.im.is_zero()) re = zero;
  return {re, im};
}

struct CFMatrix {
  long n = 0;
  long w = 64;
  std::vector<CF> a;

  CFMatrix() = default;
  CFMatrix(long n_, long w_) : n(n_), w(w_), a(static_cast<std::size_t>(n_ * n_), cf_zero(w_)) {}
  CF& at(long i, long j) { return a[static_cast<std::size_t>(i * n + j)]; }
  const CF& at(long i, long j) const { return a[static_cast<std::size_t>(i * n + j)]; }
  static CFMatrix identity(long n, long w) {
    CFMatrix m(n, w);
    for (long i = 0; i < n; ++i) m.at(i, i) = cf_one(w);
    return m;
  }
};

// Plane rotation [c, s; -conj(s), c] with real c annihilating the second
// component of (a, b).
struct Rot {
  BigFloat c;
  CF s;
};

inline Rot make_rot(const CF& a, const CF& b, long w) {
  BigFloat ab = cf_abs(a, w);
  BigFloat bb = cf_abs(b, w);
  if (bb.is_zero()) return {BigFloat::from_long(1, w), cf_zero(w)};
  BigFloat r = bf_sqrt(bf_add(bf_mul(ab, ab, w, MPFR_RNDN), bf_mul(bb, bb, w, MPFR_RNDN), w, MPFR_RNDN), w, MPFR_RNDN);
  if (ab.is_zero()) {
    CF s = cf_scale(cf_conj(b, w), bf_div(BigFloat::from_long(1, w), bb, w, MPFR_RNDN), w);
    return {BigFloat::from_long(0, w), s};
  }
  BigFloat c = bf_div(ab, r, w, MPFR_RNDN);
  // s = (a/|a|) * conj(b) / r
  CF phase = cf_scale(a, bf_div(BigFloat::from_long(1, w), ab, w, MPFR_RNDN), w);
  CF s = cf_scale(cf_mul(phase, cf_conj(b, w), w), bf_div(BigFloat::from_long(1, w), r, w, MPFR_RNDN), w);
  return {c, s};
}

// rows i,j:  (x_i, x_j) <- (c x_i + s x_j, -conj(s) x_i + c x_j)
inline void rot_rows(CFMatrix& m, const Rot& g, long i, long j, long col_lo, long col_hi) {
  long w = m.w;
  CF sc = cf_conj(g.s, w);
  for (long k = col_lo; k <= col_hi; ++k) {
    CF xi = m.at(i, k), xj = m.at(j, k);
    m.at(i, k) = cf_add(cf_scale(xi, g.c, w), cf_mul(g.s, xj, w), w);
    m.at(j, k) = cf_sub(cf_scale(xj, g.c, w), cf_mul(sc, xi, w), w);
  }
}
// cols i,j with the adjoint rotation:  (y_i, y_j) <- (c y_i + conj(s) y_j, -s y_i + c y_j)
inline void rot_cols(CFMatrix& m, const Rot& g, long i, long j, long row_lo, long row_hi) {
  long w = m.w;
  CF sc = cf_conj(g.s, w);
  for (long k = row_lo; k <= row_hi; ++k) {
    CF yi = m.at(k, i), yj = m.at(k, j);
    m.at(k, i) = cf_add(cf_scale(yi, g.c, w), cf_mul(sc, yj, w), w);
    m.at(k, j) = cf_sub(cf_scale(yj, g.c, w), cf_mul(g.s, yi, w), w);
  }
}

inline void hessenberg(CFMatrix& a, CFMatrix& q) {
  long n = a.n, w = a.w;
  for (long k = 0; k + 2 < n; ++k) {
    for (long i = n - 1; i >= k + 2; --i) {
      if (cf_is_zero(a.at(i, k))) continue;
      Rot g = make_rot(a.at(i - 1, k), a.at(i, k), w);
      rot_rows(a, g, i - 1, i, k, n - 1);
      rot_cols(a, g, i - 1, i, 0, n - 1);
      rot_cols(q, g, i - 1, i, 0, n - 1);
      a.at(i, k) = cf_zero(w);
    }
  }
}

inline BigFloat mat_norm_est(const CFMatrix& a) {
  long n = a.n, w = a.w;
  BigFloat m = BigFloat::from_long(0, w);
  for (long i = 0; i < n; ++i) {
    BigFloat row = BigFloat::from_long(0, w);
    for (long j = 0; j < n; ++j) row = bf_add(row, cf_abs(a.at(i, j), w), w, MPFR_RNDU);
    m = bf_max(m, row);
  }
  return m;
}

// Shifted QR with deflation on a Hessenberg matrix; accumulates the unitary
// similarity into q so that on return a = q^dagger A_in q (approximately),
// with a upper triangular.
inline void qr_schur(CFMatrix& a, CFMatrix& q) {
  long n = a.n, w = a.w;
  if (n <= 1) return;
  BigFloat norm = mat_norm_est(a);
  if (norm.is_zero()) return;
  // relative deflation threshold 2^-(w-6)
  BigFloat tol = bf_mul_2e(BigFloat::from_long(1, w), -(w - 6), w);
  long hi = n - 1;
  long total_iter = 0;
  long stall = 0;
  const long max_total = 60 * n + 200;
  while (hi > 0) {
    // deflate converged subdiagonals from the bottom
    bool deflated = true;
    while (hi > 0 && deflated) {
      BigFloat sd = cf_abs(a.at(hi, hi - 1), w);
      BigFloat scale = bf_add(cf_abs(a.at(hi, hi), w), cf_abs(a.at(hi - 1, hi - 1), w), w, MPFR_RNDN);
      if (scale.is_zero()) scale = norm;
      if (sd <= bf_mul(tol, scale, w, MPFR_RNDN)) {
        a.at(hi, hi - 1) = cf_zero(w);
        --hi;
        stall = 0;
      } else {
        deflated = false;
      }
    }
    if (hi == 0) break;
    // find the active block [lo..hi]
    long lo = hi;
    while (lo > 0) {
      BigFloat sd = cf_abs(a.at(lo, lo - 1), w);
      BigFloat scale = bf_add(cf_abs(a.at(lo, lo), w), cf_abs(a.at(lo - 1, lo - 1), w), w, MPFR_RNDN);
      if (scale.is_zero()) scale = norm;
      if (sd <= bf_mul(tol, scale, w, MPFR_RNDN)) {
        a.at(lo, lo - 1) = cf_zero(w);
        break;
      }
      --lo;
    }
    if (++total_iter > max_total)
      throw IllConditioned("qr_schur: iteration limit reached");
    // Wilkinson shift from the trailing 2x2 of the active block
    CF shift;
    {
      CF aa = a.at(hi - 1, hi - 1), bb = a.at(hi - 1, hi);
      CF cc = a.at(hi, hi - 1), dd = a.at(hi, hi);
      if (++stall % 12 == 0) {
        // exceptional shift to break rare stalls
        shift = cf_add(dd, CF{cf_abs(cc, w), BigFloat::from_long(0, w)}, w);
      } else {
        CF tr = cf_add(aa, dd, w);
        CF half{bf_mul_2e(tr.re, -1, w), bf_mul_2e(tr.im, -1, w)};
        CF diff = cf_sub(aa, dd, w);
        CF disc = cf_mul(diff, diff, w);
        disc = cf_add(disc, cf_scale(cf_mul(bb, cc, w), BigFloat::from_long(4, w), w), w);
        CF root = cf_sqrt(disc, w);
        CF r1 = cf_add(half, CF{bf_mul_2e(root.re, -1, w), bf_mul_2e(root.im, -1, w)}, w);
        CF r2 = cf_sub(half, CF{bf_mul_2e(root.re, -1, w), bf_mul_2e(root.im, -1, w)}, w);
        shift = cf_abs(cf_sub(r1, dd, w), w) <= cf_abs(cf_sub(r2, dd, w), w) ? r1 : r2;
      }
    }
    // implicit single-shift sweep over [lo..hi]
    CF x = cf_sub(a.at(lo, lo), shift, w);
    CF y = a.at(lo + 1, lo);
    for (long k = lo; k < hi; ++k) {
      Rot g = make_rot(x, y, w);
      long r0 = k > lo ? k - 1 : lo;
      rot_rows(a, g, k, k + 1, r0, n - 1);
      rot_cols(a, g, k, k + 1, 0, std::min(k + 2, hi));
      rot_cols(q, g, k, k + 1, 0, n - 1);
      if (k + 2 <= hi) {
        x = a.at(k + 1, k);
        y = a.at(k + 2, k);
      }
    }
  }
}

// Eigenvectors of the (approximately) triangular t by back-substitution,
// mapped back through q. Columns are normalized to unit max magnitude.
inline CFMatrix schur_vectors(const CFMatrix& t, const CFMatrix& q) {
  long n = t.n, w = t.w;
  BigFloat norm = mat_norm_est(t);
  if (norm.is_zero()) norm = BigFloat::from_long(1, w);
  BigFloat smlnum = bf_mul(bf_mul_2e(BigFloat::from_long(1, w), -w / 2, w), norm, w, MPFR_RNDN);
  CFMatrix y(n, w);
  for (long j = 0; j < n; ++j) {
    y.at(j, j) = cf_one(w);
    for (long i = j - 1; i >= 0; --i) {
      CF sum = cf_zero(w);
      for (long k = i + 1; k <= j; ++k) sum = cf_add(sum, cf_mul(t.at(i, k), y.at(k, j), w), w);
      CF den = cf_sub(t.at(i, i), t.at(j, j), w);
      if (cf_abs(den, w) < smlnum) den = CF{smlnum, BigFloat::from_long(0, w)};
      y.at(i, j) = cf_neg(cf_div(sum, den, w), w);
    }
    BigFloat mx = BigFloat::from_long(0, w);
    for (long i = 0; i <= j; ++i) mx = bf_max(mx, cf_abs(y.at(i, j), w));
    if (mx.sign() > 0) {
      BigFloat inv = bf_div(BigFloat::from_long(1, w), mx, w, MPFR_RNDN);
      for (long i = 0; i <= j; ++i) y.at(i, j) = cf_scale(y.at(i, j), inv, w);
    }
  }
  // X = Q * Y
  CFMatrix x(n, w);
  for (long i = 0; i < n; ++i)
    for (long k = 0; k < n; ++k) {
      const CF& qik = q.at(i, k);
      if (cf_is_zero(qik)) continue;
      for (long j = k; j < n; ++j)  // y is upper triangular
        x.at(i, j) = cf_add(x.at(i, j), cf_mul(qik, y.at(k, j), w), w);
    }
  return x;
}

// LU factorization with partial pivoting; returns the approximate inverse.
inline CFMatrix lu_inverse(const CFMatrix& m) {
  long n = m.n, w = m.w;
  CFMatrix lu = m;
  std::vector<long> piv(static_cast<std::size_t>(n));
  std::iota(piv.begin(), piv.end(), 0);
  for (long k = 0; k < n; ++k) {
    long best = k;
    BigFloat bm = cf_abs(lu.at(k, k), w);
    for (long i = k + 1; i < n; ++i) {
      BigFloat v = cf_abs(lu.at(i, k), w);
      if (v > bm) {
        bm = v;
        best = i;
      }
    }
    if (bm.is_zero()) throw IllConditioned("lu_inverse: singular matrix");
    if (best != k) {
      for (long j = 0; j < n; ++j) std::swap(lu.at(k, j), lu.at(best, j));
      std::swap(piv[static_cast<std::size_t>(k)], piv[static_cast<std::size_t>(best)]);
    }
    CF inv = cf_div(cf_one(w), lu.at(k, k), w);
    for (long i = k + 1; i < n; ++i) {
      CF f = cf_mul(lu.at(i, k), inv, w);
      lu.at(i, k) = f;
      if (cf_is_zero(f)) continue;
      for (long j = k + 1; j < n; ++j)
        lu.at(i, j) = cf_sub(lu.at(i, j), cf_mul(f, lu.at(k, j), w), w);
    }
  }
  // solve for each unit vector
  CFMatrix inv(n, w);
  std::vector<CF> col(static_cast<std::size_t>(n), cf_zero(w));
  for (long e = 0; e < n; ++e) {
    for (long i = 0; i < n; ++i)
      col[static_cast<std::size_t>(i)] = piv[static_cast<std::size_t>(i)] == e ? cf_one(w) : cf_zero(w);
    for (long i = 0; i < n; ++i)
      for (long k = 0; k < i; ++k)
        col[static_cast<std::size_t>(i)] =
            cf_sub(col[static_cast<std::size_t>(i)], cf_mul(lu.at(i, k), col[static_cast<std::size_t>(k)], w), w);
    for (long i = n - 1; i >= 0; --i) {
      for (long k = i + 1; k < n; ++k)
        col[static_cast<std::size_t>(i)] =
            cf_sub(col[static_cast<std::size_t>(i)], cf_mul(lu.at(i, k), col[static_cast<std::size_t>(k)], w), w);
      col[static_cast<std::size_t>(i)] = cf_div(col[static_cast<std::size_t>(i)], lu.at(i, i), w);
    }
    for (long i = 0; i < n; ++i) inv.at(i, e) = col[static_cast<std::size_t>(i)];
  }
  return inv;
}

inline CIMatrix ci_from_cf(const CFMatrix& m, long prec) {
  CIMatrix r(m.n, m.n, prec);
  for (long i = 0; i < m.n; ++i)
    for (long j = 0; j < m.n; ++j)
      r.at(i, j) = CInterval{RInterval::point(m.at(i, j).re, prec),
                             RInterval::point(m.at(i, j).im, prec)};
  return r;
}

// Midpoint-radius interval matrix product: exact-dyadic midpoints are
// multiplied at full precision round-to-nearest, and radii (which cover the
// input radii, their cross terms, and the accumulated rounding error of the
// midpoint pass) are tracked in cheap low-precision upward arithmetic.
inline CIMatrix ci_mul(const CIMatrix& a, const CIMatrix& b) {
  const long w = a.prec;
  const long rp = 64;  // radius working precision
  const long n = a.rows, m = a.cols, q = b.cols;
  if (b.rows != m) throw DimensionMismatch("ci_mul shape mismatch");

  auto split = [&](const CIMatrix& x, std::vector<CF>& mid, std::vector<BigFloat>& rad,
                   std::vector<BigFloat>& mag) {
    mid.assign(static_cast<std::size_t>(x.rows * x.cols), cf_zero(w));
    rad.assign(static_cast<std::size_t>(x.rows * x.cols), BigFloat::from_long(0, rp));
    mag.assign(static_cast<std::size_t>(x.rows * x.cols), BigFloat::from_long(0, rp));
    for (long i = 0; i < x.rows; ++i)
      for (long j = 0; j < x.cols; ++j) {
        const CInterval& e = x.at(i, j);
        std::size_t z = static_cast<std::size_t>(i * x.cols + j);
        BigFloat mre(w), mim(w);
        mpfr_add(mre.raw(), e.re.lo().raw(), e.re.hi().raw(), MPFR_RNDN);
        mpfr_mul_2si(mre.raw(), mre.raw(), -1, MPFR_RNDN);
        mpfr_add(mim.raw(), e.im.lo().raw(), e.im.hi().raw(), MPFR_RNDN);
        mpfr_mul_2si(mim.raw(), mim.raw(), -1, MPFR_RNDN);
        mid[z] = CF{mre, mim};
        // componentwise radius upper bound, padded for the midpoint rounding
        BigFloat rre = bf_sub(e.re.hi(), e.re.lo(), rp, MPFR_RNDU);
        BigFloat rim = bf_sub(e.im.hi(), e.im.lo(), rp, MPFR_RNDU);
        BigFloat r = bf_mul_2e(bf_max(rre, rim), -1, rp);
        BigFloat mg = bf_add(bf_abs(mre, rp, MPFR_RNDU), bf_abs(mim, rp, MPFR_RNDU), rp, MPFR_RNDU);
        r = bf_add(r, bf_mul_2e(mg, -(w - 2), rp), rp, MPFR_RNDU);
        rad[z] = r;
        mag[z] = bf_add(mg, r, rp, MPFR_RNDU);
      }
  };
  std::vector<CF> am, bm;
  std::vector<BigFloat> ar, br, ag, bg;
  split(a, am, ar, ag);
  split(b, bm, br, bg);

  CIMatrix c(n, q, w);
  // rounding-error coefficient for the midpoint accumulation
  BigFloat err_coef = bf_mul_2e(BigFloat::from_long(8 * (m + 8), rp), -w, rp);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < q; ++j) {
      CF acc = cf_zero(w);
      BigFloat rad = BigFloat::from_long(0, rp);
      BigFloat magsum = BigFloat::from_long(0, rp);
      for (long k = 0; k < m; ++k) {
        std::size_t za = static_cast<std::size_t>(i * m + k);
        std::size_t zb = static_cast<std::size_t>(k * q + j);
        if (cf_is_zero(am[za]) && ar[za].is_zero()) continue;
        acc = cf_add(acc, cf_mul(am[za], bm[zb], w), w);
        // |A|rad(B) + rad(A)|B| + rad(A)rad(B), all upward at rp
        BigFloat t = bf_mul(ag[za], br[zb], rp, MPFR_RNDU);
        t = bf_add(t, bf_mul(ar[za], bg[zb], rp, MPFR_RNDU), rp, MPFR_RNDU);
        rad = bf_add(rad, t, rp, MPFR_RNDU);
        magsum = bf_add(magsum, bf_mul(ag[za], bg[zb], rp, MPFR_RNDU), rp, MPFR_RNDU);
      }
      rad = bf_add(rad, bf_mul(err_coef, magsum, rp, MPFR_RNDU), rp, MPFR_RNDU);
      CInterval cell{RInterval::point(acc.re, w), RInterval::point(acc.im, w)};
      c.at(i, j) = civ_bloat(cell, rad, w);
    }
  return c;
}

// ||I - m||_inf upper bound
inline BigFloat residual_inf_norm(const CIMatrix& m) {
  long p = m.prec;
  BigFloat worst = BigFloat::from_long(0, p);
  for (long i = 0; i < m.rows; ++i) {
    BigFloat row = BigFloat::from_long(0, p);
    for (long j = 0; j < m.cols; ++j) {
      CInterval e = m.at(i, j);
      if (i == j)
        e = civ_sub(e, CInterval::from_rats(Rational(1), Rational(0), p), p);
      row = bf_add(row, civ_mag(e, p), p, MPFR_RNDU);
    }
    worst = bf_max(worst, row);
  }
  return worst;
}

// Certified enclosure of X^-1 A X given an approximate inverse R of X:
// X^-1 A X = (I - E)^-1 R A X with E = I - R X; the Neumann tail is folded
// in as a per-column inflation. Fails (nullopt via throw) if ||E|| >= 1/4.
inline CIMatrix certified_similarity(const CIMatrix& a, const CFMatrix& x,
                                     const CFMatrix& r) {
  long p = a.prec;
  CIMatrix xi = ci_from_cf(x, p);
  CIMatrix ri = ci_from_cf(r, p);
  CIMatrix e = ci_mul(ri, xi);
  BigFloat enorm = residual_inf_norm(e);
  if (!(enorm < BigFloat::from_rat(Rational(1, 4), p, MPFR_RNDD)))
    throw IllConditioned("certified_similarity: basis too ill-conditioned");
  CIMatrix g = ci_mul(ri, ci_mul(a, xi));
  // tail factor ||N||_inf <= e/(1-e)
  BigFloat tail = bf_div(enorm, bf_sub(BigFloat::from_long(1, p), enorm, p, MPFR_RNDD), p, MPFR_RNDU);
  long n = g.rows;
  for (long j = 0; j < n; ++j) {
    BigFloat colmax = BigFloat::from_long(0, p);
    for (long k = 0; k < n; ++k) colmax = bf_max(colmax, civ_mag(g.at(k, j), p));
    BigFloat bloat = bf_mul(tail, colmax, p, MPFR_RNDU);
    for (long i = 0; i < n; ++i) g.at(i, j) = civ_bloat(g.at(i, j), bloat, p);
  }
  return g;
}

struct Disk {
  CInterval center;
  BigFloat radius;
};

// Gershgorin disks of b under an exact diagonal scaling 2^scale_e[i].
inline std::vector<Disk> scaled_gershgorin(const CIMatrix& b, const std::vector<long>& scale_e) {
  long n = b.rows, p = b.prec;
  std::vector<Disk> disks;
  disks.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    BigFloat rad = BigFloat::from_long(0, p);
    for (long j = 0; j < n; ++j) {
      if (i == j) continue;
      BigFloat m = civ_mag(b.at(i, j), p);
      long shift = scale_e[static_cast<std::size_t>(j)] - scale_e[static_cast<std::size_t>(i)];
      m = bf_mul_2e(m, shift, p);
      rad = bf_add(rad, m, p, MPFR_RNDU);
    }
    disks.push_back({b.at(i, i), rad});
  }
  return disks;
}

struct DisjointSet {
  std::vector<long> parent;
  explicit DisjointSet(long n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  long find(long x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(long a, long b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Boxes for each disk, components by box overlap, hulls merged until
// pairwise disjoint. Returns clusters sorted by (re.lo, im.lo).
inline std::vector<EigenCluster> disks_to_clusters(const std::vector<Disk>& disks, long p) {
  long n = static_cast<long>(disks.size());
  std::vector<CInterval> boxes;
  boxes.reserve(disks.size());
  for (const Disk& d : disks) boxes.push_back(civ_bloat(d.center, d.radius, p));
  DisjointSet ds(n);
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j)
      if (!civ_disjoint(boxes[static_cast<std::size_t>(i)], boxes[static_cast<std::size_t>(j)], p))
        ds.unite(i, j);
  std::vector<EigenCluster> clusters;
  std::vector<long> root_of(static_cast<std::size_t>(n), -1);
  for (long i = 0; i < n; ++i) {
    long r = ds.find(i);
    long& slot = root_of[static_cast<std::size_t>(r)];
    if (slot < 0) {
      slot = static_cast<long>(clusters.size());
      clusters.push_back({boxes[static_cast<std::size_t>(i)], 1});
    } else {
      clusters[static_cast<std::size_t>(slot)].encl =
          civ_hull(clusters[static_cast<std::size_t>(slot)].encl, boxes[static_cast<std::size_t>(i)], p);
      clusters[static_cast<std::size_t>(slot)].multiplicity += 1;
    }
  }
  // merge clusters whose hulls still overlap
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i)
      for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j)
        if (!civ_disjoint(clusters[i].encl, clusters[j].encl, p)) {
          clusters[i].encl = civ_hull(clusters[i].encl, clusters[j].encl, p);
          clusters[i].multiplicity += clusters[j].multiplicity;
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
  }
  std::sort(clusters.begin(), clusters.end(), [](const EigenCluster& a, const EigenCluster& b) {
    Rational ar = a.encl.re.lo_q(), br = b.encl.re.lo_q();
    if (ar != br) return ar < br;
    return a.encl.im.lo_q() < b.encl.im.lo_q();
  });
  return clusters;
}

// Reorder the Schur form so that members of each approximate-eigenvalue
// cluster are contiguous; needed by the scaled fallback path.
inline std::vector<long> cluster_labels(const CFMatrix& t, const BigFloat& tau) {
  long n = t.n, w = t.w;
  DisjointSet ds(n);
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) {
      BigFloat dist = cf_abs(cf_sub(t.at(i, i), t.at(j, j), w), w);
      if (dist <= tau) ds.unite(i, j);
    }
  std::vector<long> label(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = ds.find(i);
  return label;
}

inline void swap_adjacent_schur(CFMatrix& t, CFMatrix& q, long k) {
  long w = t.w;
  CF b = t.at(k, k + 1);
  CF diff = cf_sub(t.at(k + 1, k + 1), t.at(k, k), w);
  Rot g = make_rot(b, diff, w);
  rot_rows(t, g, k, k + 1, 0, t.n - 1);
  rot_cols(t, g, k, k + 1, 0, t.n - 1);
  rot_cols(q, g, k, k + 1, 0, t.n - 1);
  t.at(k + 1, k) = cf_zero(w);
}

}  // namespace eig_detail

// Certified eigenvalue clusters of a square matrix of certified scalars.
// target_bits asks for cluster boxes of width <= 2^-target_bits; escalation
// stops at the settings cap, at which point ClusterAmbiguity is raised.
inline std::vector<EigenCluster> eigen_enclosures(const Matrix& m, long target_bits,
                                                  const CertSettings& cs = {}) {
  using namespace eig_detail;
  if (!m.is_square()) throw DimensionMismatch("eigen_enclosures: matrix not square");
  long n = m.rows();
  if (n == 0) return {};

  // exact-diagonal fast path (zero and diagonal matrices stay exact)
  bool diag_exact = true;
  for (long i = 0; i < n && diag_exact; ++i)
    for (long j = 0; j < n && diag_exact; ++j)
      if (i != j && !m.at(i, j).is_zero_exact()) diag_exact = false;
  if (diag_exact) {
    bool all_exact = true;
    for (long i = 0; i < n; ++i)
      if (!m.at(i, i).is_exact()) all_exact = false;
    if (all_exact) {
      std::vector<std::pair<ComplexRational, long>> vals;
      for (long i = 0; i < n; ++i) {
        ComplexRational v = m.at(i, i).exact();
        bool found = false;
        for (auto& [val, cnt] : vals)
          if (val == v) {
            ++cnt;
            found = true;
          }
        if (!found) vals.emplace_back(v, 1);
      }
      long p = std::max(target_bits + 16, cs.start_bits);
      std::vector<EigenCluster> out;
      out.reserve(vals.size());
      for (auto& [val, cnt] : vals)
        out.push_back({CInterval::from_rats(val.re, val.im, p), cnt});
      std::sort(out.begin(), out.end(), [](const EigenCluster& a, const EigenCluster& b) {
        Rational ar = a.encl.re.lo_q(), br = b.encl.re.lo_q();
        if (ar != br) return ar < br;
        return a.encl.im.lo_q() < b.encl.im.lo_q();
      });
      return out;
    }
  }

  Rational target_width = pow2(-target_bits);
  long w = std::max({cs.start_bits, target_bits + 48, 128L});
  for (;;) {
    // approximate Schur at working precision w
    CFMatrix a(n, w);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) {
        CInterval e = m.at(i, j).enclosure(w);
        a.at(i, j) = CF{BigFloat::from_rat(e.re.mid_q(), w, MPFR_RNDN),
                        BigFloat::from_rat(e.im.mid_q(), w, MPFR_RNDN)};
      }
    CFMatrix q = CFMatrix::identity(n, w);
    std::vector<EigenCluster> result;
    bool ok = false;
    try {
      hessenberg(a, q);
      qr_schur(a, q);
      CIMatrix ai = enclosure_matrix(m, w);
      std::vector<long> no_scale(static_cast<std::size_t>(n), 0);
      // primary: eigenvector basis (tight for diagonalizable inputs)
      try {
        CFMatrix x = schur_vectors(a, q);
        CFMatrix r = lu_inverse(x);
        CIMatrix b = certified_similarity(ai, x, r);
        result = disks_to_clusters(scaled_gershgorin(b, no_scale), w);
        ok = true;
      } catch (const IllConditioned&) {
        ok = false;
      }
      if (!ok || [&] {
            for (const auto& c : result)
              if (c.encl.re.width_q() > target_width || c.encl.im.width_q() > target_width)
                return true;
            return false;
          }()) {
        // fallback: scaled Schur basis (handles defective clusters)
        BigFloat tau = bf_mul(bf_max(mat_norm_est(a), BigFloat::from_long(1, w)),
                              bf_mul_2e(BigFloat::from_long(1, w), -w / 4, w), w, MPFR_RNDU);
        std::vector<long> labels = cluster_labels(a, tau);
        // make clusters contiguous by adjacent swaps (stable pass)
        std::vector<long> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (long pass = 0; pass < n; ++pass) {
          bool moved = false;
          for (long k = 0; k + 1 < n; ++k) {
            long la = labels[static_cast<std::size_t>(k)];
            long lb = labels[static_cast<std::size_t>(k + 1)];
            if (la == lb) continue;
            // pull members of la's cluster together: swap if a later member
            // of la exists beyond a foreign element
            bool later_same = false;
            for (long j = k + 1; j < n; ++j)
              if (labels[static_cast<std::size_t>(j)] == la) later_same = true;
            bool earlier_same_b = false;
            for (long j = 0; j < k; ++j)
              if (labels[static_cast<std::size_t>(j)] == lb) earlier_same_b = true;
            if (later_same || earlier_same_b) {
              swap_adjacent_schur(a, q, k);
              std::swap(labels[static_cast<std::size_t>(k)], labels[static_cast<std::size_t>(k + 1)]);
              moved = true;
            }
          }
          if (!moved) break;
        }
        // geometric within-cluster scaling exponents
        std::vector<long> scale(static_cast<std::size_t>(n), 0);
        {
          long i = 0;
          while (i < n) {
            long j = i;
            while (j + 1 < n && labels[static_cast<std::size_t>(j + 1)] == labels[static_cast<std::size_t>(i)]) ++j;
            long k = j - i + 1;
            long g = k > 1 ? w / (2 * k) : 0;
            for (long t = i; t <= j; ++t) scale[static_cast<std::size_t>(t)] = -g * (t - i);
            i = j + 1;
          }
        }
        CFMatrix r(n, w);
        // R approx Q^-1 = Q^dagger
        for (long i = 0; i < n; ++i)
          for (long j = 0; j < n; ++j) r.at(i, j) = cf_conj(q.at(j, i), w);
        CIMatrix b = certified_similarity(ai, q, r);
        result = disks_to_clusters(scaled_gershgorin(b, scale), w);
        ok = true;
      }
    } catch (const IllConditioned&) {
      ok = false;
    }
    if (ok) {
      bool tight = true;
      for (const auto& c : result)
        if (c.encl.re.width_q() > target_width || c.encl.im.width_q() > target_width)
          tight = false;
      if (tight) return result;
    }
    if (w >= cs.cap_bits)
      throw ClusterAmbiguity(
          "eigen_enclosures: clusters not separable to the requested width below the precision cap");
    w = cs.next(w);
  }
}

// Density-operator validation: entrywise Hermiticity, certified unit trace,
// and a certified lower bound on the spectrum.
struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(const std::string& msg) {
    ok = false;
    violations.push_back(msg);
  }
};

inline ValidationReport validate_density(const Matrix& rho, const Rational& tol,
                                         const CertSettings& cs = {}) {
  ValidationReport rep;
  if (!rho.is_square()) {
    rep.fail("density operator must be square");
    return rep;
  }
  long n = rho.rows();
  // Hermiticity: exact where exact, certified-difference otherwise
  for (long i = 0; i < n; ++i)
    for (long j = i; j < n; ++j) {
      const CScalar& a = rho.at(i, j);
      CScalar b = rho.at(j, i).conj();
      if (a.is_exact() && b.is_exact()) {
        if (!(a.exact() == b.exact()))
          rep.fail("not Hermitian at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      } else {
        Complex d = a.value() - b.value();
        if (sign_of(d.re, cs) != Sign::Undetermined || sign_of(d.im, cs) != Sign::Undetermined)
          rep.fail("not Hermitian at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  // trace = 1
  CScalar tr = rho.trace();
  if (tr.is_exact()) {
    if (!(tr.exact() == ComplexRational(Rational(1))))
      rep.fail("trace != 1 (exactly " + to_string(tr.exact().re) + ")");
  } else {
    Complex d = tr.value() - Complex(Rational(1));
    if (sign_of(d.re, cs) != Sign::Undetermined || sign_of(d.im, cs) != Sign::Undetermined)
      rep.fail("trace differs from 1 (certified)");
  }
  if (!rep.ok) return rep;
  // spectrum >= -tol
  try {
    auto clusters = eigen_enclosures(rho, 48, cs);
    for (const auto& c : clusters) {
      if (c.encl.re.hi_q() < -tol) {
        rep.fail("negative eigenvalue certified: enclosure below -tolerance");
        break;
      }
      if (c.encl.re.lo_q() < -tol && c.encl.re.hi_q() >= -tol) {
        rep.fail("eigenvalue enclosure dips below -tolerance (unresolved)");
        break;
      }
    }
  } catch (const Error& e) {
    rep.fail(std::string("eigenvalue bound unavailable: ") + e.what());
  }
  return rep;
}

}  // namespace qstl
