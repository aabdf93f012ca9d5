#pragma once

#include <string>
#include <vector>

#include "carnot/graded_algebra.hpp"
#include "carnot/linalg.hpp"
#include "carnot/polynomial.hpp"

namespace carnot {

/// Polynomial group law synthesized from the Dynkin series, with pruning at
/// max_letters letters (pass the step for the exact law; more to check that
/// pruned terms vanish). Returns n polynomials in the 2n variables
/// (x_1..x_n, y_1..y_n).
std::vector<Poly> dynkin_law(const GradedLieAlgebra& A, int max_letters);

/// Pointwise Dynkin product of two coefficient vectors, same series and
/// conventions as dynkin_law. T is double or Rational.
template <class T>
std::vector<T> dynkin_star(const GradedLieAlgebra& A, const std::vector<T>& X,
                           const std::vector<T>& Y, int max_letters);

/// A graded group in exponential coordinates of the first kind: the algebra,
/// its synthesized law, and derived data (law Jacobian in y, the matrix of
/// left translation at the identity).
///
/// Points are their coordinate vectors; exp and log are the identity,
/// inverse(x) = -x, Haar measure is Lebesgue measure.
class Group {
public:
  /// Synthesizes the law. Throws DomainError if the algebra fails validation.
  explicit Group(GradedLieAlgebra alg);

  const GradedLieAlgebra& algebra() const { return m_alg; }
  int dim() const { return m_alg.dim(); }
  int step() const { return m_alg.step(); }
  int hom_dim() const { return m_alg.hom_dim(); }
  const std::string& name() const { return m_alg.name(); }

  const std::vector<Poly>& law() const { return m_law; }
  const Poly& law_jac_y(int k, int i) const { return m_jy[k][i]; }
  const Poly& tau_poly(int k, int i) const { return m_tau[k][i]; }

  /// Exact product.
  std::vector<Rational> multiply(const std::vector<Rational>& x,
                                 const std::vector<Rational>& y) const;
  std::vector<double> multiply(const std::vector<double>& x, const std::vector<double>& y) const;

  /// Fast path: out must not alias x or y.
  void multiply(const double* x, const double* y, double* out) const;

  template <class T>
  std::vector<T> inverse(const std::vector<T>& x) const {
    std::vector<T> r(x);
    for (auto& v : r) v = -v;
    return r;
  }

  /// Differential of left translation L_x at the identity.
  Matrix tau(const double* x) const;
  std::vector<std::vector<Rational>> tau_exact(const std::vector<Rational>& x) const;

  /// Jacobian matrix of y -> x*y at (x, y); rows k, cols i. xy is the stacked
  /// point (x_1..x_n, y_1..y_n).
  Matrix law_jacobian_y(const double* xy) const;

  /// Law rendered one coordinate per line, stable term order.
  std::string law_text() const;

private:
  GradedLieAlgebra m_alg;
  std::vector<Poly> m_law;
  std::vector<std::vector<Poly>> m_jy;
  std::vector<std::vector<Poly>> m_tau;
  std::vector<FlatPoly> m_flat_law;
  std::vector<FlatPoly> m_flat_jy;  // row-major n*n
  std::vector<FlatPoly> m_flat_tau; // row-major n*n
};

} // namespace carnot
