#include "carnot/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "carnot/errors.hpp"

namespace carnot {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul shape mismatch");
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double v = A(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += v * B(k, j);
    }
  return C;
}

std::vector<double> matvec(const Matrix& A, const std::vector<double>& x) {
  if (A.cols != static_cast<int>(x.size())) throw std::invalid_argument("matvec shape mismatch");
  std::vector<double> y(A.rows, 0.0);
  matvec(A, x.data(), y.data());
  return y;
}

void matvec(const Matrix& A, const double* x, double* out) {
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A(i, j) * x[j];
    out[i] = s;
  }
}

namespace {

// LU with partial pivoting; returns permutation sign, 0 on singular.
int lu_decompose(Matrix& A, std::vector<int>& piv) {
  const int n = A.rows;
  piv.resize(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  int sign = 1;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::fabs(A(k, k));
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(A(i, k)) > best) {
        best = std::fabs(A(i, k));
        p = i;
      }
    if (best == 0.0) return 0;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(A(p, j), A(k, j));
      std::swap(piv[p], piv[k]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      A(i, k) /= A(k, k);
      double f = A(i, k);
      for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
    }
  }
  return sign;
}

} // namespace

Matrix inverse(const Matrix& A0) {
  if (A0.rows != A0.cols) throw std::invalid_argument("inverse of non-square matrix");
  const int n = A0.rows;
  Matrix A = A0;
  std::vector<int> piv;
  if (lu_decompose(A, piv) == 0) throw DomainError("singular matrix");
  Matrix inv(n, n);
  for (int c = 0; c < n; ++c) {
    std::vector<double> b(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (piv[i] == c) b[i] = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) b[i] -= A(i, j) * b[j];
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) b[i] -= A(i, j) * b[j];
      b[i] /= A(i, i);
    }
    for (int i = 0; i < n; ++i) inv(i, c) = b[i];
  }
  return inv;
}

double determinant(Matrix A) {
  if (A.rows != A.cols) throw std::invalid_argument("determinant of non-square matrix");
  std::vector<int> piv;
  int sign = lu_decompose(A, piv);
  if (sign == 0) return 0.0;
  double d = sign;
  for (int i = 0; i < A.rows; ++i) d *= A(i, i);
  return d;
}

double max_abs(const Matrix& A) {
  double m = 0.0;
  for (double v : A.a) m = std::max(m, std::fabs(v));
  return m;
}

Rational det_exact(std::vector<std::vector<Rational>> m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return Rational(1);
  Rational sign(1);
  Rational prev(1);
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k] == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (m[i][k] != 0) {
          p = i;
          break;
        }
      if (p < 0) return Rational(0);
      std::swap(m[k], m[p]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

} // namespace carnot
