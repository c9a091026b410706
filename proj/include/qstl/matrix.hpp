#pragma once

#include <variant>
#include <vector>

#include "qstl/real.hpp"

namespace qstl {

// Matrix scalar: exact complex rational where possible, certified complex
// (recipe-backed) otherwise. Exact zeros short-circuit arithmetic so sparse
// operators do not grow recipe DAGs.
class CScalar {
 public:
  CScalar() : v_(ComplexRational{}) {}
  CScalar(ComplexRational c) : v_(std::move(c)) {}   // NOLINT(runtime/explicit)
  CScalar(Complex c) : v_(std::move(c)) {}           // NOLINT(runtime/explicit)
  explicit CScalar(const Rational& r) : v_(ComplexRational(r)) {}

  static CScalar zero() { return CScalar(); }
  static CScalar one() { return CScalar(ComplexRational(Rational(1))); }
  static CScalar i() {
    return CScalar(ComplexRational(Rational(0), Rational(1)));
  }

  bool is_exact() const { return std::holds_alternative<ComplexRational>(v_); }
  bool is_zero_exact() const { return is_exact() && exact().is_zero(); }
  const ComplexRational& exact() const { return std::get<ComplexRational>(v_); }
  Complex value() const {
    if (is_exact()) return Complex(exact());
    return std::get<Complex>(v_);
  }
  CInterval enclosure(long prec) const {
    if (is_exact())
      return CInterval::from_rats(exact().re, exact().im, prec);
    return std::get<Complex>(v_).enclosure(prec);
  }

  CScalar conj() const {
    if (is_exact()) return CScalar(exact().conj());
    return CScalar(std::get<Complex>(v_).conj());
  }

  friend CScalar operator+(const CScalar& a, const CScalar& b) {
    if (a.is_zero_exact()) return b;
    if (b.is_zero_exact()) return a;
    if (a.is_exact() && b.is_exact()) return CScalar(a.exact() + b.exact());
    return CScalar(a.value() + b.value());
  }
  friend CScalar operator-(const CScalar& a, const CScalar& b) {
    if (b.is_zero_exact()) return a;
    if (a.is_exact() && b.is_exact()) return CScalar(a.exact() - b.exact());
    return CScalar(a.value() - b.value());
  }
  friend CScalar operator-(const CScalar& a) {
    if (a.is_exact()) return CScalar(-a.exact());
    return CScalar(-std::get<Complex>(a.v_));
  }
  friend CScalar operator*(const CScalar& a, const CScalar& b) {
    if (a.is_zero_exact() || b.is_zero_exact()) return CScalar();
    if (a.is_exact() && b.is_exact()) return CScalar(a.exact() * b.exact());
    return CScalar(a.value() * b.value());
  }
  friend CScalar operator/(const CScalar& a, const CScalar& b) {
    if (a.is_exact() && b.is_exact()) return CScalar(a.exact() / b.exact());
    return CScalar(a.value() / b.value());
  }

 private:
  std::variant<ComplexRational, Complex> v_;
};

// Dense matrix of certified scalars, row-major.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(long rows, long cols)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols)) {}

  static Matrix identity(long n) {
    Matrix m(n, n);
    for (long i = 0; i < n; ++i) m.at(i, i) = CScalar::one();
    return m;
  }

  long rows() const { return rows_; }
  long cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  CScalar& at(long i, long j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  const CScalar& at(long i, long j) const {
    return a_[static_cast<std::size_t>(i * cols_ + j)];
  }

  Matrix adjoint() const {
    Matrix m(cols_, rows_);
    for (long i = 0; i < rows_; ++i)
      for (long j = 0; j < cols_; ++j) m.at(j, i) = at(i, j).conj();
    return m;
  }
  Matrix transpose() const {
    Matrix m(cols_, rows_);
    for (long i = 0; i < rows_; ++i)
      for (long j = 0; j < cols_; ++j) m.at(j, i) = at(i, j);
    return m;
  }
  Matrix conj() const {
    Matrix m(rows_, cols_);
    for (long i = 0; i < rows_; ++i)
      for (long j = 0; j < cols_; ++j) m.at(i, j) = at(i, j).conj();
    return m;
  }
  CScalar trace() const {
    CScalar t;
    for (long i = 0; i < rows_; ++i) t = t + at(i, i);
    return t;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw DimensionMismatch("matrix addition shape mismatch");
    Matrix m(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = a.a_[k] + b.a_[k];
    return m;
  }
  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw DimensionMismatch("matrix subtraction shape mismatch");
    Matrix m(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = a.a_[k] - b.a_[k];
    return m;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
    Matrix m(a.rows_, b.cols_);
    for (long i = 0; i < a.rows_; ++i)
      for (long k = 0; k < a.cols_; ++k) {
        const CScalar& aik = a.at(i, k);
        if (aik.is_zero_exact()) continue;
        for (long j = 0; j < b.cols_; ++j) {
          const CScalar& bkj = b.at(k, j);
          if (bkj.is_zero_exact()) continue;
          m.at(i, j) = m.at(i, j) + aik * bkj;
        }
      }
    return m;
  }
  friend Matrix operator*(const CScalar& s, const Matrix& a) {
    Matrix m(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.a_.size(); ++k) m.a_[k] = s * a.a_[k];
    return m;
  }

 private:
  long rows_, cols_;
  std::vector<CScalar> a_;
};

// Kronecker product with block convention (i1,i2) -> i1*rows(B)+i2.
inline Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i1 = 0; i1 < a.rows(); ++i1)
    for (long j1 = 0; j1 < a.cols(); ++j1) {
      const CScalar& s = a.at(i1, j1);
      if (s.is_zero_exact()) continue;
      for (long i2 = 0; i2 < b.rows(); ++i2)
        for (long j2 = 0; j2 < b.cols(); ++j2)
          m.at(i1 * b.rows() + i2, j1 * b.cols() + j2) = s * b.at(i2, j2);
    }
  return m;
}

// L2V: row-major flattening of a square operator into a d^2 column.
inline Matrix vectorize(const Matrix& g) {
  if (!g.is_square()) throw DimensionMismatch("vectorize needs a square matrix");
  long d = g.rows();
  Matrix v(d * d, 1);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) v.at(i * d + j, 0) = g.at(i, j);
  return v;
}

// V2L: inverse of vectorize.
inline Matrix devectorize(const Matrix& v) {
  if (v.cols() != 1) throw DimensionMismatch("devectorize needs a column vector");
  long n = v.rows();
  long d = 1;
  while (d * d < n) ++d;
  if (d * d != n)
    throw DimensionMismatch("devectorize needs a perfect-square length");
  Matrix m(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) m.at(i, j) = v.at(i * d + j, 0);
  return m;
}

// Governing matrix of the vectorized Lindblad ODE:
//   -iH (x) I + iI (x) H^T + sum_j ( Lj (x) Lj* - 1/2 Lj†Lj (x) I - 1/2 I (x) Lj^T Lj* )
inline Matrix governing_matrix(const Matrix& h, const std::vector<Matrix>& ls) {
  if (!h.is_square()) throw DimensionMismatch("H must be square");
  long d = h.rows();
  Matrix id = Matrix::identity(d);
  CScalar i_unit = CScalar::i();
  CScalar half(Rational(1, 2));
  Matrix m = ((-i_unit) * tensor(h, id)) + (i_unit * tensor(id, h.transpose()));
  for (const Matrix& l : ls) {
    if (l.rows() != d || l.cols() != d)
      throw DimensionMismatch("L operator dimension differs from H");
    Matrix ldl = l.adjoint() * l;
    // (L†L)^T = L^T L*, which is the operator in the I (x) L^T L* term
    m = m + tensor(l, l.conj()) - half * tensor(ldl, id) -
        half * tensor(id, ldl.transpose());
  }
  return m;
}

// Interval view of a matrix at a working precision.
struct CIMatrix {
  long rows = 0, cols = 0;
  long prec = 64;
  std::vector<CInterval> a;

  CIMatrix() = default;
  CIMatrix(long r, long c, long p)
      : rows(r), cols(c), prec(p),
        a(static_cast<std::size_t>(r * c), CInterval::point_zero(p)) {}

  CInterval& at(long i, long j) { return a[static_cast<std::size_t>(i * cols + j)]; }
  const CInterval& at(long i, long j) const {
    return a[static_cast<std::size_t>(i * cols + j)];
  }
};

inline CIMatrix enclosure_matrix(const Matrix& m, long prec) {
  CIMatrix r(m.rows(), m.cols(), prec);
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) r.at(i, j) = m.at(i, j).enclosure(prec);
  return r;
}

}  // namespace qstl
