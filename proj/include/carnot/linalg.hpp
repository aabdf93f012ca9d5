#pragma once

#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

/// Small dense row-major matrix. Sized for group dimensions (n <= ~12).
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Matrix identity(int n);
};

Matrix matmul(const Matrix& A, const Matrix& B);
std::vector<double> matvec(const Matrix& A, const std::vector<double>& x);
void matvec(const Matrix& A, const double* x, double* out);

/// Partial-pivot LU inverse. Throws DomainError on (numerically) singular input.
Matrix inverse(const Matrix& A);

/// Determinant via LU.
double determinant(Matrix A);

double max_abs(const Matrix& A);

/// Exact determinant of a rational matrix (Bareiss elimination).
Rational det_exact(std::vector<std::vector<Rational>> m);

} // namespace carnot
