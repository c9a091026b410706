#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <sstream>

#include "qstl/eigensolve.hpp"
#include "qstl/exppoly.hpp"

namespace qstl {

// Closed form of exp(M t) v, one exponential polynomial per coordinate.
// Coefficients solve the confluent-Vandermonde system matching the first D
// derivatives at t = 0, certified by an approximate-inverse residual bound.
// The context is shared by the coefficient/eigenvalue refinement recipes so
// the whole pipeline can be re-run at higher precision on demand.
class ClosedFormContext : public std::enable_shared_from_this<ClosedFormContext> {
 public:
  static std::shared_ptr<ClosedFormContext> create(Matrix m, Matrix v, long base_bits,
                                                   CertSettings cs = {},
                                                   std::vector<std::string>* audit = nullptr) {
    auto ctx = std::shared_ptr<ClosedFormContext>(new ClosedFormContext());
    ctx->m_ = std::move(m);
    ctx->v_ = std::move(v);
    ctx->cs_ = cs;
    ctx->base_bits_ = base_bits;
    if (!ctx->m_.is_square() || ctx->v_.cols() != 1 || ctx->v_.rows() != ctx->m_.rows())
      throw DimensionMismatch("exp action needs square M and a matching column");
    const Solved& base = ctx->solved(base_bits);
    ctx->frozen_mults_.clear();
    ctx->frozen_encls_.clear();
    for (const auto& c : base.clusters) {
      ctx->frozen_mults_.push_back(c.multiplicity);
      ctx->frozen_encls_.push_back(c.encl);
    }
    // cached eigen runs predate the frozen ordering; drop them so every
    // later lookup is aligned against the frozen cluster list
    ctx->eig_cache_.clear();
    ctx->build_exppolys(base, audit);
    return ctx;
  }

  const std::vector<ExpPoly>& coordinates() const { return coords_; }
  long dim() const { return m_.rows(); }

  CInterval cluster_enclosure(std::size_t k, long prec) {
    return eigen_at(prec)[k].encl;
  }
  CInterval coefficient(std::size_t fn_index, long coord, long prec) {
    const Solved& s = solved(prec);
    return s.coeffs[fn_index * static_cast<std::size_t>(dim()) + static_cast<std::size_t>(coord)];
  }

 private:
  ClosedFormContext() = default;

  struct Solved {
    std::vector<EigenCluster> clusters;
    std::vector<CInterval> coeffs;  // [fn_index * D + coord]
  };

  const Solved& solved(long prec) {
    std::lock_guard<std::mutex> g(mu_);
    // any cached solve at >= prec already satisfies the request
    auto it = cache_.lower_bound(prec);
    if (it != cache_.end()) return it->second;
    Solved s = align_to_frozen(solve_at(prec));
    return cache_.emplace(prec, std::move(s)).first->second;
  }

  // Eigen data is much cheaper than the coefficient solve and is what the
  // exponent recipes refine through; cache it separately.
  const std::vector<EigenCluster>& eigen_at(long prec) {
    std::lock_guard<std::mutex> g(eig_mu_);
    auto it = eig_cache_.lower_bound(prec);
    if (it != eig_cache_.end()) return it->second;
    std::vector<EigenCluster> clusters = eigen_enclosures(m_, prec, cs_);
    if (!frozen_encls_.empty()) {
      if (clusters.size() != frozen_encls_.size())
        throw PrecisionExhausted(
            "closed form: eigenvalue cluster structure changed under refinement");
      std::vector<EigenCluster> ordered(clusters.size());
      std::vector<bool> taken(clusters.size(), false);
      for (std::size_t k = 0; k < frozen_encls_.size(); ++k) {
        bool found = false;
        for (std::size_t j = 0; j < clusters.size(); ++j) {
          if (taken[j]) continue;
          long p = std::min(frozen_encls_[k].prec(), clusters[j].encl.prec());
          if (!civ_disjoint(frozen_encls_[k], clusters[j].encl, p) &&
              clusters[j].multiplicity == frozen_mults_[k]) {
            ordered[k] = clusters[j];
            taken[j] = true;
            found = true;
            break;
          }
        }
        if (!found)
          throw PrecisionExhausted(
              "closed form: eigenvalue cluster structure changed under refinement");
      }
      clusters = std::move(ordered);
    }
    return eig_cache_.emplace(prec, std::move(clusters)).first->second;
  }

  // Cluster order can differ between runs when enclosures tie on re.lo;
  // permute a fresh solve (clusters and coefficient rows) into the frozen
  // base order, matching clusters by box intersection.
  Solved align_to_frozen(Solved s) {
    if (frozen_encls_.empty()) return s;
    long d = dim();
    if (s.clusters.size() != frozen_encls_.size())
      throw PrecisionExhausted(
          "closed form: eigenvalue cluster structure changed under refinement");
    std::vector<std::size_t> perm(frozen_encls_.size());
    std::vector<bool> taken(s.clusters.size(), false);
    for (std::size_t k = 0; k < frozen_encls_.size(); ++k) {
      bool found = false;
      for (std::size_t j = 0; j < s.clusters.size(); ++j) {
        if (taken[j]) continue;
        long p = std::min(frozen_encls_[k].prec(), s.clusters[j].encl.prec());
        if (!civ_disjoint(frozen_encls_[k], s.clusters[j].encl, p) &&
            s.clusters[j].multiplicity == frozen_mults_[k]) {
          perm[k] = j;
          taken[j] = true;
          found = true;
          break;
        }
      }
      if (!found)
        throw PrecisionExhausted(
            "closed form: eigenvalue cluster structure changed under refinement");
    }
    // function index offsets per cluster in both orders
    auto offsets = [d](const std::vector<long>& mults) {
      std::vector<long> off(mults.size() + 1, 0);
      for (std::size_t k = 0; k < mults.size(); ++k) off[k + 1] = off[k] + mults[k];
      if (off.back() != d) throw Error("closed form: multiplicity bookkeeping error");
      return off;
    };
    std::vector<long> new_mults;
    for (const auto& c : s.clusters) new_mults.push_back(c.multiplicity);
    std::vector<long> src_off = offsets(new_mults);
    std::vector<long> dst_off = offsets(frozen_mults_);
    Solved out;
    out.clusters.resize(frozen_encls_.size());
    out.coeffs.assign(s.coeffs.size(), CInterval::point_zero(64));
    for (std::size_t k = 0; k < frozen_encls_.size(); ++k) {
      out.clusters[k] = s.clusters[perm[k]];
      for (long r = 0; r < frozen_mults_[k]; ++r)
        for (long c = 0; c < d; ++c)
          out.coeffs[static_cast<std::size_t>((dst_off[k] + r) * d + c)] =
              s.coeffs[static_cast<std::size_t>((src_off[perm[k]] + r) * d + c)];
    }
    return out;
  }

  Solved solve_at(long prec) {
    long w = std::max({cs_.start_bits, prec + 96, 256L});
    for (;;) {
      long eig_target = std::max(prec + 16, w / 3);
      std::vector<EigenCluster> clusters = eigen_at(eig_target);
      try {
        Solved s = certify_solve(clusters, w);
        bool tight = true;
        Rational target = pow2(-prec);
        for (const CInterval& c : s.coeffs)
          if (c.re.width_q() > target || c.im.width_q() > target) tight = false;
        if (tight) return s;
      } catch (const IllConditioned&) {
        // escalate
      }
      if (w >= cs_.cap_bits)
        throw IllConditioned(
            "closed form: coefficient system cannot be certified below the precision cap");
      w = cs_.next(w);
    }
  }

  Solved certify_solve(const std::vector<EigenCluster>& clusters, long w) {
    using namespace eig_detail;
    long d = dim();
    // basis functions: (cluster k, degree r < mult_k)
    std::vector<std::pair<std::size_t, long>> fns;
    for (std::size_t k = 0; k < clusters.size(); ++k)
      for (long r = 0; r < clusters[k].multiplicity; ++r) fns.emplace_back(k, r);
    if (static_cast<long>(fns.size()) != d)
      throw IllConditioned("cluster multiplicities do not sum to the dimension");

    // powers of each cluster enclosure
    std::vector<std::vector<CInterval>> pw(clusters.size());
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      pw[k].reserve(static_cast<std::size_t>(d));
      CInterval one = CInterval::from_rats(Rational(1), Rational(0), w);
      CInterval base{RInterval(clusters[k].encl.re.lo(), clusters[k].encl.re.hi(), w),
                     RInterval(clusters[k].encl.im.lo(), clusters[k].encl.im.hi(), w)};
      pw[k].push_back(one);
      for (long j = 1; j < d; ++j) pw[k].push_back(civ_mul(pw[k].back(), base, w));
    }

    // Taylor-coefficient normalization keeps all magnitudes of order
    // e^{|lambda|}: row j matches the degree-j Taylor coefficient, so
    // W[j][f] = lambda_k^{j-r} / (j-r)!  and  B[j][c] = (M^j v)_c / j!.
    CIMatrix wmat(d, d, w);
    for (long j = 0; j < d; ++j)
      for (long f = 0; f < d; ++f) {
        auto [k, r] = fns[static_cast<std::size_t>(f)];
        if (j < r) continue;  // zero
        Int fact(1);
        for (long s = 2; s <= j - r; ++s) fact *= Int(s);
        CInterval cell = pw[k][static_cast<std::size_t>(j - r)];
        RInterval inv = RInterval::from_rat(Rational(1) / Rational(fact), w);
        wmat.at(j, f) = CInterval{iv_mul(cell.re, inv, w), iv_mul(cell.im, inv, w)};
      }

    // B[j][c] = (M^j v)_c / j!, built incrementally as cur <- M cur / j
    CIMatrix mi = enclosure_matrix(m_, w);
    CIMatrix bmat(d, d, w);
    CIMatrix cur(d, 1, w);
    for (long i = 0; i < d; ++i) cur.at(i, 0) = v_.at(i, 0).enclosure(w);
    for (long j = 0; j < d; ++j) {
      for (long c = 0; c < d; ++c) bmat.at(j, c) = cur.at(c, 0);
      if (j + 1 < d) {
        cur = ci_mul(mi, cur);
        RInterval inv = RInterval::from_rat(Rational(1, j + 1), w);
        for (long i = 0; i < d; ++i)
          cur.at(i, 0) = CInterval{iv_mul(cur.at(i, 0).re, inv, w),
                                   iv_mul(cur.at(i, 0).im, inv, w)};
      }
    }

    // midpoint solve
    CFMatrix wmid(d, w), bmid(d, w);
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) {
        wmid.at(i, j) = CF{BigFloat::from_rat(wmat.at(i, j).re.mid_q(), w, MPFR_RNDN),
                           BigFloat::from_rat(wmat.at(i, j).im.mid_q(), w, MPFR_RNDN)};
        bmid.at(i, j) = CF{BigFloat::from_rat(bmat.at(i, j).re.mid_q(), w, MPFR_RNDN),
                           BigFloat::from_rat(bmat.at(i, j).im.mid_q(), w, MPFR_RNDN)};
      }
    CFMatrix rw = lu_inverse(wmid);  // throws IllConditioned when singular
    CFMatrix xhat(d, w);
    {
      // xhat = rw * bmid
      for (long i = 0; i < d; ++i)
        for (long k = 0; k < d; ++k) {
          if (cf_is_zero(rw.at(i, k))) continue;
          for (long j = 0; j < d; ++j)
            xhat.at(i, j) = cf_add(xhat.at(i, j), cf_mul(rw.at(i, k), bmid.at(k, j), w), w);
        }
    }

    CIMatrix rwi = ci_from_cf(rw, w);
    CIMatrix f_res = ci_mul(rwi, wmat);
    BigFloat fnorm = residual_inf_norm(f_res);
    if (!(fnorm < BigFloat::from_rat(Rational(1, 2), w, MPFR_RNDD)))
      throw IllConditioned("vandermonde: approximate inverse too weak");
    BigFloat tail = bf_div(fnorm, bf_sub(BigFloat::from_long(1, w), fnorm, w, MPFR_RNDD), w, MPFR_RNDU);

    CIMatrix res = ci_mul(wmat, ci_from_cf(xhat, w));
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) res.at(i, j) = civ_sub(bmat.at(i, j), res.at(i, j), w);
    CIMatrix corr = ci_mul(rwi, res);

    Solved out;
    out.clusters = clusters;
    out.coeffs.assign(static_cast<std::size_t>(d * d), CInterval::point_zero(w));
    for (long c = 0; c < d; ++c) {
      BigFloat colmax = BigFloat::from_long(0, w);
      for (long f = 0; f < d; ++f) colmax = bf_max(colmax, civ_mag(corr.at(f, c), w));
      BigFloat bloat = bf_mul(tail, colmax, w, MPFR_RNDU);
      for (long f = 0; f < d; ++f) {
        CInterval point{RInterval::point(xhat.at(f, c).re, w),
                        RInterval::point(xhat.at(f, c).im, w)};
        CInterval enc = civ_add(point, corr.at(f, c), w);
        out.coeffs[static_cast<std::size_t>(f * d + c)] = civ_bloat(enc, bloat, w);
      }
    }
    return out;
  }

  void build_exppolys(const Solved& base, std::vector<std::string>* audit) {
    long d = dim();
    auto self = shared_from_this();
    // one symbol per cluster
    std::vector<SymPtr> syms;
    for (std::size_t k = 0; k < base.clusters.size(); ++k) {
      Real re = Real::from_fn([self, k](long p) { return self->cluster_enclosure(k, p).re; });
      Real im = Real::from_fn([self, k](long p) { return self->cluster_enclosure(k, p).im; });
      auto sym = std::make_shared<ExponentSym>();
      sym->value = Complex{std::move(re), std::move(im)};
      sym->order_key = ExponentSym::next_key();
      syms.push_back(std::move(sym));
    }
    std::vector<std::pair<std::size_t, long>> fns;
    for (std::size_t k = 0; k < base.clusters.size(); ++k)
      for (long r = 0; r < base.clusters[k].multiplicity; ++r) fns.emplace_back(k, r);

    Rational prune = pow2(-base_bits_ / 2);
    coords_.clear();
    coords_.reserve(static_cast<std::size_t>(d));
    for (long c = 0; c < d; ++c) {
      ExpPoly poly;
      for (std::size_t k = 0; k < base.clusters.size(); ++k) {
        std::vector<Complex> coeffs;
        long mult = base.clusters[k].multiplicity;
        bool any = false;
        for (long r = 0; r < mult; ++r) {
          long f = 0;
          for (std::size_t kk = 0; kk < fns.size(); ++kk)
            if (fns[kk].first == k && fns[kk].second == r) f = static_cast<long>(kk);
          CInterval enc = base.coeffs[static_cast<std::size_t>(f * d + c)];
          BigFloat magn = civ_mag(enc, enc.prec());
          if (magn.to_rat() < prune) {
            if (audit) {
              std::ostringstream os;
              os << "pruned coefficient: coordinate " << c << ", cluster " << k
                 << ", degree " << r << ", |beta| <= " << magn.to_rat().get_d();
              audit->push_back(os.str());
            }
            coeffs.push_back(Complex(Rational(0)));
            continue;
          }
          any = true;
          long fi = f, cc = c;
          auto self2 = self;
          Real re = Real::from_fn([self2, fi, cc](long p) { return self2->coefficient(static_cast<std::size_t>(fi), cc, p).re; });
          Real im = Real::from_fn([self2, fi, cc](long p) { return self2->coefficient(static_cast<std::size_t>(fi), cc, p).im; });
          coeffs.push_back(Complex{std::move(re), std::move(im)});
        }
        while (!coeffs.empty() && coeffs.back().is_exact() &&
               coeffs.back().exact_value().is_zero())
          coeffs.pop_back();
        if (!any || coeffs.empty()) continue;
        poly = poly + ExpPoly::term(ExpKey::from_sym(syms[k]), std::move(coeffs));
      }
      coords_.push_back(std::move(poly));
    }
    spot_check();
  }

  // Double-precision scaling-and-squaring sanity check of the assembled
  // closed form at a few sample times; catches structural mistakes.
  void spot_check() const {
    long d = dim();
    std::vector<std::complex<double>> m(static_cast<std::size_t>(d * d));
    std::vector<std::complex<double>> v(static_cast<std::size_t>(d));
    for (long i = 0; i < d; ++i) {
      CInterval e = v_.at(i, 0).enclosure(64);
      v[static_cast<std::size_t>(i)] = {e.re.mid_q().get_d(), e.im.mid_q().get_d()};
      for (long j = 0; j < d; ++j) {
        CInterval em = m_.at(i, j).enclosure(64);
        m[static_cast<std::size_t>(i * d + j)] = {em.re.mid_q().get_d(), em.im.mid_q().get_d()};
      }
    }
    for (double t : {0.0, 0.5, 1.0}) {
      // expm(M t) v by scaling and squaring on the Taylor series
      int s = 6;
      double scale = t / std::pow(2.0, s);
      std::vector<std::complex<double>> em(static_cast<std::size_t>(d * d), 0.0);
      for (long i = 0; i < d; ++i) em[static_cast<std::size_t>(i * d + i)] = 1.0;
      std::vector<std::complex<double>> term = em, acc = em;
      for (int k = 1; k <= 24; ++k) {
        std::vector<std::complex<double>> nt(static_cast<std::size_t>(d * d), 0.0);
        for (long i = 0; i < d; ++i)
          for (long l = 0; l < d; ++l) {
            std::complex<double> x = term[static_cast<std::size_t>(i * d + l)] * (scale / double(k));
            if (x == std::complex<double>(0.0)) continue;
            for (long j = 0; j < d; ++j)
              nt[static_cast<std::size_t>(i * d + j)] += x * m[static_cast<std::size_t>(l * d + j)];
          }
        term.swap(nt);
        for (std::size_t z = 0; z < acc.size(); ++z) acc[z] += term[z];
      }
      for (int r = 0; r < s; ++r) {
        std::vector<std::complex<double>> sq(static_cast<std::size_t>(d * d), 0.0);
        for (long i = 0; i < d; ++i)
          for (long l = 0; l < d; ++l) {
            std::complex<double> x = acc[static_cast<std::size_t>(i * d + l)];
            if (x == std::complex<double>(0.0)) continue;
            for (long j = 0; j < d; ++j)
              sq[static_cast<std::size_t>(i * d + j)] += x * acc[static_cast<std::size_t>(l * d + j)];
          }
        acc.swap(sq);
      }
      for (long c = 0; c < d; ++c) {
        std::complex<double> want(0.0);
        for (long l = 0; l < d; ++l)
          want += acc[static_cast<std::size_t>(c * d + l)] * v[static_cast<std::size_t>(l)];
        CInterval got = coords_[static_cast<std::size_t>(c)].eval(Rational(t * 2) / 2, 64);
        double slack = 1e-6 + pow2(-base_bits_ / 2).get_d() * 64 * 8;
        if (std::abs(got.re.mid_q().get_d() - want.real()) > slack + got.re.width_q().get_d() ||
            std::abs(got.im.mid_q().get_d() - want.imag()) > slack + got.im.width_q().get_d()) {
#ifdef QSTL_SPOTCHECK_DEBUG
          fprintf(stderr, "spot check miss: t=%g coord=%ld got=(%g,%g) want=(%g,%g) width=(%g,%g)\n",
                  t, c, got.re.mid_q().get_d(), got.im.mid_q().get_d(), want.real(), want.imag(),
                  got.re.width_q().get_d(), got.im.width_q().get_d());
#endif
          throw IllConditioned("closed form failed its numeric spot check");
        }
      }
    }
  }

  Matrix m_, v_;
  CertSettings cs_;
  long base_bits_ = 64;
  std::vector<long> frozen_mults_;
  std::vector<CInterval> frozen_encls_;
  std::mutex eig_mu_;
  std::map<long, std::vector<EigenCluster>> eig_cache_;
  std::vector<ExpPoly> coords_;
  std::mutex mu_;
  std::map<long, Solved> cache_;
};

// Spec-level operation: the closed form of exp(M t) v as exponential
// polynomials, certified at `precision_bits`.
inline std::vector<ExpPoly> exp_action_exppoly(const Matrix& m, const Matrix& v,
                                               long precision_bits = 64,
                                               const CertSettings& cs = {},
                                               std::vector<std::string>* audit = nullptr) {
  return ClosedFormContext::create(m, v, precision_bits, cs, audit)->coordinates();
}

// Spec-level eigendata: certified eigenvalue clusters with multiplicities.
inline std::vector<EigenCluster> eigendata(const Matrix& m, long precision_bits,
                                           const CertSettings& cs = {}) {
  return eigen_enclosures(m, precision_bits, cs);
}

}  // namespace qstl
