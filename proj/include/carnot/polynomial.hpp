#pragma once

#include <map>
#include <string>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

/// Exponent vector, one slot per variable.
using Mono = std::vector<unsigned>;

/// Descending lexicographic order on exponent vectors; gives the stable term
/// order used everywhere a polynomial is printed.
struct MonoGreater {
  bool operator()(const Mono& a, const Mono& b) const { return a > b; }
};

/// Sparse multivariate polynomial with exact rational coefficients.
class Poly {
public:
  Poly() = default;
  explicit Poly(int nvars) : m_nvars(nvars) {}

  static Poly variable(int nvars, int i);
  static Poly constant(int nvars, const Rational& c);

  int nvars() const { return m_nvars; }
  bool is_zero() const { return m_terms.empty(); }
  const std::map<Mono, Rational, MonoGreater>& terms() const { return m_terms; }

  /// Adds c * monomial, dropping the term if the sum cancels.
  void add_term(const Mono& mono, const Rational& c);

  /// Coefficient of a monomial (zero if absent).
  Rational coeff(const Mono& mono) const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const Rational& c) const;
  Poly operator-() const;
  bool operator==(const Poly& o) const { return m_nvars == o.m_nvars && m_terms == o.m_terms; }

  /// d/d(var i).
  Poly derivative(int var) const;

  /// Sets the listed variables to zero (drops every term touching them).
  Poly with_vars_zeroed(const std::vector<int>& vars) const;

  /// Exact or floating evaluation; T is Rational or double.
  template <class T>
  T eval(const std::vector<T>& point) const;

  /// Total degree counted with the given per-variable weights.
  /// Returns -1 for the zero polynomial, -2 if terms disagree (inhomogeneous).
  long weighted_degree(const std::vector<int>& weights) const;

  /// Deterministic text form, terms in descending lexicographic order.
  std::string to_string(const std::vector<std::string>& names) const;

private:
  int m_nvars = 0;
  std::map<Mono, Rational, MonoGreater> m_terms;
};

namespace detail {
inline double scalar_from(const Rational& q, double) { return q.get_d(); }
inline Rational scalar_from(const Rational& q, const Rational&) { return q; }
} // namespace detail

template <class T>
T Poly::eval(const std::vector<T>& point) const {
  T acc = detail::scalar_from(Rational(0), T());
  for (const auto& [mono, c] : m_terms) {
    T t = detail::scalar_from(c, T());
    for (int v = 0; v < m_nvars; ++v)
      for (unsigned e = 0; e < mono[v]; ++e) t *= point[v];
    acc += t;
  }
  return acc;
}

/// Dense, double-precision compiled form of a Poly for hot evaluation paths.
class FlatPoly {
public:
  FlatPoly() = default;
  explicit FlatPoly(const Poly& p);

  double eval(const double* point) const;
  int nvars() const { return m_nvars; }

private:
  int m_nvars = 0;
  int m_nterms = 0;
  std::vector<double> m_coef;
  std::vector<unsigned char> m_exp; // nterms * nvars
};

} // namespace carnot
