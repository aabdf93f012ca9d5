#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "carnot/polynomial.hpp"
#include "carnot/rational.hpp"

namespace carnot {

/// One summand of a basis bracket: [e_i, e_j] ∋ c * e_k.
struct BracketTerm {
  int k;
  Rational c;
};

/// Graded nilpotent Lie algebra on an adapted basis e_1..e_n.
///
/// Structure constants are stored for i < j only; antisymmetry is synthesized.
/// Weights are the homogeneous degrees of the basis vectors, nondecreasing.
class GradedLieAlgebra {
public:
  GradedLieAlgebra(int n, int step, std::vector<int> weights, std::string name);

  int dim() const { return m_n; }
  int step() const { return m_step; }
  int weight(int i) const { return m_weights[i]; }
  const std::vector<int>& weights() const { return m_weights; }
  const std::string& name() const { return m_name; }

  /// Homogeneous dimension, the sum of the weights.
  int hom_dim() const;

  /// Declares [e_i, e_j] += c e_k (0-based, i < j). Throws FormatError on bad
  /// indices or duplicate (i,j,k).
  void set_bracket(int i, int j, int k, const Rational& c);

  /// Terms of [e_i, e_j] for i < j.
  const std::vector<BracketTerm>& basis_bracket(int i, int j) const;

  /// [X, Y] for coefficient vectors over T in {double, Rational, Poly}.
  /// zero is a prototypical zero element (Poly needs its arity).
  template <class T>
  std::vector<T> bracket(const std::vector<T>& X, const std::vector<T>& Y, const T& zero) const;

  std::vector<double> bracket(const std::vector<double>& X, const std::vector<double>& Y) const;
  std::vector<Rational> bracket(const std::vector<Rational>& X, const std::vector<Rational>& Y) const;

private:
  int pair_index(int i, int j) const { return i * m_n - i * (i + 1) / 2 + (j - i - 1); }

  int m_n;
  int m_step;
  std::vector<int> m_weights;
  std::string m_name;
  std::vector<std::vector<BracketTerm>> m_table; // indexed by pair_index(i<j)
};

/// One broken axiom, with the basis indices that witness it (1-based, -1 unused).
struct AxiomViolation {
  std::string kind; // "weights", "step", "grading", "jacobi"
  std::array<int, 3> idx;
  std::string message;
};

/// Outcome of validate_algebra. Empty violation list means the axioms hold exactly.
struct ValidationReport {
  std::vector<AxiomViolation> violations;
  bool valid() const { return violations.empty(); }
  std::string to_string() const;
};

/// Exact check of weight monotonicity, step consistency, grading compatibility
/// and the Jacobi identity on all basis triples.
ValidationReport validate_algebra(const GradedLieAlgebra& A);

/// Builtin algebras: "heisenberg", "heisenberg(d)", "engel",
/// "free_nilpotent(2,3)", "abelian(n)", "abelian(w1,...,wn)".
GradedLieAlgebra builtin_algebra(const std::string& id);

/// Reads the plain-text group format:
///   line 1: n step
///   line 2: n weights
///   rest:   i j k p/q   (1-based, i < j)
/// Blank lines and '#' comments are skipped. Throws FormatError on anything
/// that cannot be parsed; axiom checks are left to validate_algebra.
GradedLieAlgebra read_algebra(std::istream& in, const std::string& name);
GradedLieAlgebra read_algebra_file(const std::string& path);

/// Writes the same format; read_algebra round-trips it.
void write_algebra(std::ostream& out, const GradedLieAlgebra& A);

namespace detail {
inline void scale_add(std::vector<double>& out, int k, const Rational& c, double v) {
  out[k] += c.get_d() * v;
}
inline void scale_add(std::vector<Rational>& out, int k, const Rational& c, const Rational& v) {
  out[k] += c * v;
}
inline void scale_add(std::vector<Poly>& out, int k, const Rational& c, const Poly& v) {
  out[k] += v * c;
}
} // namespace detail

template <class T>
std::vector<T> GradedLieAlgebra::bracket(const std::vector<T>& X, const std::vector<T>& Y,
                                         const T& zero) const {
  std::vector<T> out(static_cast<size_t>(m_n), zero);
  for (int i = 0; i < m_n; ++i)
    for (int j = i + 1; j < m_n; ++j) {
      const auto& terms = basis_bracket(i, j);
      if (terms.empty()) continue;
      T coef = X[i] * Y[j] - X[j] * Y[i];
      for (const auto& t : terms) detail::scale_add(out, t.k, t.c, coef);
    }
  return out;
}

} // namespace carnot
